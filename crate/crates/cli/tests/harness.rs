use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use globalphase::Activation;
use harness::config::{EvalMode, ModelKind, ModelSpec};
use harness::{preset, report, run_experiment, ExperimentConfig, HarnessError, RunOptions};

fn tiny(mut cfg: ExperimentConfig, out: &Path) -> ExperimentConfig {
    cfg = cfg
        .with_overrides(&[
            "n_particles=3".into(),
            "hidden=[8]".into(),
            "train.max_iters=60".into(),
            "train.min_iters=20".into(),
            "train.n_phi=16".into(),
            "train.trace_points=32".into(),
            "eval.grid_points=64".into(),
            "eval.jacobian_points=32".into(),
            "analysis.grid_points=16".into(),
            "snapshots.grid_points=8".into(),
        ])
        .unwrap();
    if cfg.eval.shots > 0 {
        cfg.eval.shots = 1000;
    }
    cfg.output_dir = Some(out.to_path_buf());
    cfg
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig2_global").unwrap(), &tmp.path().join("a"));
    cfg.runs = 2;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    cfg.output_dir = Some(tmp.path().join("b"));
    cfg.workers = 2;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    let (a, b) = (tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
    let strip = |m: BTreeMap<String, Vec<u8>>| m.into_iter().filter(|(k, _)| k != "config.toml").collect::<BTreeMap<_, _>>();
    assert_eq!(strip(a.clone()), strip(b));
    for f in ["run_000/vqcnni/model.json", "run_001/vqi/eval.csv", "run_000/vqcnni/trajectory.csv", "summary/summary.csv"] {
        assert!(a.contains_key(f), "{f}");
    }
    let eval = String::from_utf8(a["run_000/vqcnni/eval.csv"].clone()).unwrap();
    assert!(eval.starts_with("run,phase,phi_est,delta_phi,swpe_db,mode\n"));
    assert_eq!(eval.lines().filter(|l| l.ends_with(",shots")).count(), 64);
}

#[test]
fn config_echo_reproduces_the_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig3_representation").unwrap(), &tmp.path().join("a"));
    cfg.runs = 1;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    let mut echo = ExperimentConfig::load(&tmp.path().join("a/config.toml")).unwrap();
    assert_eq!(echo, cfg);
    echo.output_dir = Some(tmp.path().join("b"));
    run_experiment(&echo, RunOptions::default()).unwrap();
    let a = tree(&tmp.path().join("a/run_000"));
    assert_eq!(a, tree(&tmp.path().join("b/run_000")));
    assert!(a.contains_key("vqcnni_fixed/heatmap.csv"));
    assert!(a.contains_key("vqcnni/projection_latent.csv"));
    assert!(!a.contains_key("vqi/projection_latent.csv"));
}

#[test]
fn fixed_model_reuses_the_baseline_circuit() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig3_representation").unwrap(), tmp.path());
    cfg.runs = 1;
    let out = run_experiment(&cfg, RunOptions::default()).unwrap();
    let run = &out.runs[0];
    use globalphase::PhaseEstimator;
    assert_eq!(run.model("vqi").unwrap().record.model.circuit(), run.model("vqcnni_fixed").unwrap().record.model.circuit());

    // the same baseline referenced by file
    let file = tmp.path().join("run_000/vqi/model.json");
    let mut by_file = cfg.clone();
    by_file.models = vec![ModelSpec {
        label: "fixed".into(),
        kind: ModelKind::VqcnniFixed,
        activation: Activation::Softsign,
        reference: Some(file.to_string_lossy().into_owned()),
    }];
    by_file.output_dir = None;
    let o = run_experiment(&by_file, RunOptions::default()).unwrap();
    assert_eq!(o.runs[0].models[0].record.model, run.model("vqcnni_fixed").unwrap().record.model);
}

#[test]
fn missing_reference_is_a_config_error() {
    let mut cfg = preset("fig3_representation").unwrap();
    cfg.models[2].reference = None;
    assert!(matches!(run_experiment(&cfg, RunOptions::default()), Err(HarnessError::Config(_))));
    cfg.models[2].reference = Some("/nonexistent/model.json".into());
    assert!(matches!(run_experiment(&cfg, RunOptions::default()), Err(HarnessError::Config(_))));
}

#[test]
fn ablation_preset_writes_one_set_per_activation() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig5_activations").unwrap(), tmp.path());
    cfg.runs = 1;
    let out = run_experiment(&cfg, RunOptions::default()).unwrap();
    for a in Activation::ABLATION {
        assert!(tmp.path().join("run_000").join(a.name()).join("jacobian.csv").is_file(), "{a}");
    }
    let ab = out.report.ablation.as_ref().unwrap();
    assert_eq!(ab.entries.len(), 6);
    assert!(ab.entries.windows(2).all(|w| w[0].j_var <= w[1].j_var));
    let csv = fs::read_to_string(tmp.path().join("summary/ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn snapshots_follow_the_eval_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig4_dynamics").unwrap(), tmp.path());
    cfg.runs = 1;
    cfg.train.max_iters = 65;
    cfg.train.patience = 1000;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    let mut names: Vec<String> = fs::read_dir(tmp.path().join("run_000/vqcnni/snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let expected: Vec<String> = [10, 20, 30, 40, 50, 60, 65].iter().map(|e| format!("epoch_{e:05}.json")).collect();
    assert_eq!(names, expected);
}

#[test]
fn empty_directory_reports_no_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let r = report(tmp.path()).unwrap();
    assert!(r.is_empty());
    assert!(r.to_string().contains(harness::report::NO_RUNS));
}

#[test]
fn single_run_summary_equals_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig2_global").unwrap(), tmp.path());
    cfg.runs = 1;
    let out = run_experiment(&cfg, RunOptions::default()).unwrap();
    let a = out.runs[0].model("vqcnni").unwrap();
    let s = out.report.model("vqcnni").unwrap();
    assert_eq!(s.runs, 1);
    assert_eq!(s.j_var, a.jacobian.variance);
    assert_eq!(s.j_mean, a.jacobian.mean);
    assert_eq!(s.qfi_mean, a.record.qfi);
    let exact = &a.evals.iter().find(|(m, _)| *m == EvalMode::Exact).unwrap().1;
    assert_eq!(s.median_swpe(EvalMode::Exact), Some(exact.median_swpe()));
    assert_eq!(s.run_median_swpe(EvalMode::Exact), Some(exact.median_swpe()));
    // the report rebuilt from disk agrees with the in-memory one
    assert_eq!(report(tmp.path()).unwrap().summary_csv(), out.report.summary_csv());
}

#[test]
fn damaged_artifacts_make_the_report_partial() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig2_global").unwrap(), tmp.path());
    cfg.runs = 2;
    run_experiment(&cfg, RunOptions::default()).unwrap();
    fs::remove_file(tmp.path().join("run_001/vqi/eval.csv")).unwrap();
    let r = report(tmp.path()).unwrap();
    assert!(r.is_partial());
    assert_eq!(r.model("vqi").unwrap().runs, 1);
    fs::remove_dir_all(tmp.path().join("run_000")).unwrap();
    assert!(report(tmp.path()).unwrap().partial.iter().any(|p| p.contains("run_000")));
}

#[test]
fn failing_models_do_not_abort_siblings() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(preset("fig3_representation").unwrap(), tmp.path());
    cfg.runs = 2;
    // an absurd step overflows the baseline's affine estimator into NaN
    cfg.train.learning_rate = 1e300;
    let out = run_experiment(&cfg, RunOptions::default()).unwrap();
    assert!(out.any_failed());
    assert!(out.runs.iter().all(|r| r.status.failures.iter().any(|f| f.label == "vqcnni_fixed")));
    assert_eq!(out.runs.len(), 2);
    assert!(tmp.path().join("summary/runs.csv").is_file());
}
