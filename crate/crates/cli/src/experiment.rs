//! Seeded multi-run orchestration and artifact persistence.

use std::fs;
use std::path::{Path, PathBuf};

use globalphase::analysis::{feature_heatmap, latent_matrix, pca_2d, snapshot};
use globalphase::metrics::{error_table, model_jacobian};
use globalphase::training::{init_circuit, init_decoder, train_decoder_fixed, train_joint, train_vqi_baseline};
use globalphase::{
    Activation, AnyModel, CircuitParams, ErrorTable, EvalGrid, EvalPoint, HybridModel, Interferometer, JacobianStats,
    PhaseEstimator, Projection2D, Snapshot, TrainConfig, TrainTrace,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EvalMode, ExperimentConfig, ModelKind, ModelSpec, Reference};
use crate::error::{HarnessError, Result};
use crate::report::{self, Report};

/// Offset between a run's seed and the seed of its shot sampling, so
/// sampling streams never coincide with initialization streams.
pub const EVAL_SEED_OFFSET: u64 = 1 << 32;

pub const CONFIG_FILE: &str = "config.toml";
pub const RUN_FILE: &str = "run.json";
pub const MODEL_FILE: &str = "model.json";
pub const SUMMARY_DIR: &str = "summary";

pub fn run_dir_name(run: usize) -> String {
    format!("run_{run:03}")
}

/// Everything persisted in `model.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecordFile {
    pub label: String,
    pub kind: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation: Option<Activation>,
    pub run: usize,
    pub seed: u64,
    pub qfi: f64,
    pub model: AnyModel,
    pub trace: TrainTrace,
}

#[derive(Clone, Debug)]
pub struct AnalysisOutput {
    pub grid: EvalGrid,
    pub heatmap: Vec<Vec<f64>>,
    pub feature_projection: Projection2D,
    pub latent_projection: Option<Projection2D>,
}

/// One trained and evaluated model of one run.
#[derive(Clone, Debug)]
pub struct ModelArtifact {
    pub record: ModelRecordFile,
    pub evals: Vec<(EvalMode, ErrorTable)>,
    pub jacobian: JacobianStats,
    pub analysis: Option<AnalysisOutput>,
    pub snapshots: Vec<Snapshot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFailure {
    pub label: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub run: usize,
    pub seed: u64,
    pub completed: Vec<String>,
    pub failures: Vec<ModelFailure>,
}

impl RunStatus {
    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct RunArtifact {
    pub status: RunStatus,
    pub models: Vec<ModelArtifact>,
}

impl RunArtifact {
    pub fn model(&self, label: &str) -> Option<&ModelArtifact> {
        self.models.iter().find(|m| m.record.label == label)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub runs: Vec<RunArtifact>,
    pub report: Report,
}

impl ExperimentOutcome {
    pub fn any_failed(&self) -> bool {
        self.runs.iter().any(|r| r.status.failed())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Print one line per finished run to stderr.
    pub progress: bool,
}

/// Trains and evaluates every model for every run. With an output
/// directory, each run writes its own subdirectory and the summary is
/// regenerated from those files, so `report` on the same directory yields
/// the same bytes.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentOutcome> {
    config.validate()?;
    let out = config.output_dir.clone();
    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        write_text(&dir.join(CONFIG_FILE), &config.to_toml())?;
    }
    let interferometer = Interferometer::for_particles(config.n_particles)?;
    let file_refs = load_file_references(config)?;
    let workers = if config.workers == 0 { rayon::current_num_threads() } else { config.workers };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let runs: Vec<RunArtifact> = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|run| {
                let mut artifact = execute_run(config, &interferometer, &file_refs, run);
                if let Some(dir) = &out {
                    if let Err(e) = write_run(dir, &artifact) {
                        artifact.status.failures.push(ModelFailure { label: "<write>".into(), message: e.to_string() });
                        let _ = write_json(&dir.join(run_dir_name(run)).join(RUN_FILE), &artifact.status);
                    }
                }
                if options.progress {
                    let state = if artifact.status.failed() { "FAILED" } else { "ok" };
                    eprintln!("{}: run {}/{} {}", config.name, run + 1, config.runs, state);
                }
                artifact
            })
            .collect()
    });
    let report = match &out {
        Some(dir) => {
            let report = report::report(dir)?;
            report.write(&dir.join(SUMMARY_DIR))?;
            report
        }
        None => Report::from_artifacts(&config.name, &runs),
    };
    Ok(ExperimentOutcome { config: config.clone(), runs, report })
}

fn load_file_references(config: &ExperimentConfig) -> Result<Vec<Option<CircuitParams>>> {
    (0..config.models.len())
        .map(|i| match config.models[i].kind {
            ModelKind::VqcnniFixed => match config.reference(i)? {
                Reference::File(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
                    let rec: ModelRecordFile = serde_json::from_str(&text).map_err(|e| HarnessError::parse(&path, e))?;
                    match rec.model {
                        AnyModel::Vqi(m) => Ok(Some(m.circuit)),
                        AnyModel::Hybrid(_) => Err(HarnessError::Config(format!("{} is not a vqi model", path.display()))),
                    }
                }
                Reference::Label(_) => Ok(None),
            },
            _ => Ok(None),
        })
        .collect()
}

/// Trains every model of run `run`. Failures are recorded per model; a
/// fixed-circuit model whose reference failed fails too.
pub fn execute_run(
    config: &ExperimentConfig,
    interferometer: &Interferometer,
    file_refs: &[Option<CircuitParams>],
    run: usize,
) -> RunArtifact {
    let seed = config.run_seed(run);
    let mut status = RunStatus { run, seed, ..Default::default() };
    let mut models: Vec<ModelArtifact> = Vec::new();
    for (i, spec) in config.models.iter().enumerate() {
        let frozen = match (spec.kind, &file_refs[i]) {
            (ModelKind::VqcnniFixed, Some(c)) => Some(c.clone()),
            (ModelKind::VqcnniFixed, None) => {
                let r = spec.reference.as_deref().unwrap_or_default();
                match models.iter().find(|m| m.record.label == r) {
                    Some(m) => Some(m.record.model.circuit().clone()),
                    None => {
                        status.failures.push(ModelFailure {
                            label: spec.label.clone(),
                            message: format!("reference `{r}` did not complete in this run"),
                        });
                        continue;
                    }
                }
            }
            _ => None,
        };
        match train_and_evaluate(config, interferometer, spec, run, seed, frozen) {
            Ok(a) => {
                status.completed.push(spec.label.clone());
                models.push(a);
            }
            Err(e) => status.failures.push(ModelFailure { label: spec.label.clone(), message: e.to_string() }),
        }
    }
    RunArtifact { status, models }
}

fn train_and_evaluate(
    config: &ExperimentConfig,
    interferometer: &Interferometer,
    spec: &ModelSpec,
    run: usize,
    seed: u64,
    frozen: Option<CircuitParams>,
) -> Result<ModelArtifact> {
    let train = TrainConfig { seed, ..config.train.clone() };
    let snap_grid = EvalGrid::uniform(config.snapshots.grid_points, 0)?;
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut hook = |p: &EvalPoint, m: &HybridModel| -> globalphase::Result<()> {
        snapshots.push(snapshot(interferometer, m, &snap_grid, p.epoch, p.qfi, p.swpe_median)?);
        Ok(())
    };
    let hook_ref: Option<&mut globalphase::training::EvalHook<'_, HybridModel, f64>> =
        if config.snapshots.enabled { Some(&mut hook) } else { None };
    let circuit = || init_circuit::<f64>(config.layers_enc, config.layers_dec, train.circuit_init_width, seed);
    let decoder = || init_decoder::<f64>(config.n_particles, &config.hidden, spec.activation, seed);
    let (model, trace) = match spec.kind {
        ModelKind::Vqcnni => {
            let init = HybridModel::new(circuit(), decoder()?, config.n_particles)?;
            let out = train_joint(interferometer, &train, init, hook_ref)?;
            (AnyModel::Hybrid(out.model), out.trace)
        }
        ModelKind::VqcnniFixed => {
            let frozen = frozen.expect("frozen circuit resolved by caller");
            let out = train_decoder_fixed(interferometer, &train, &frozen, decoder()?, hook_ref)?;
            (AnyModel::Hybrid(out.model), out.trace)
        }
        ModelKind::Vqi => {
            let out = train_vqi_baseline(interferometer, &train, &config.prior, circuit(), None)?;
            (AnyModel::Vqi(out.model), out.trace)
        }
    };
    let mut evals = Vec::new();
    for &mode in &config.eval.modes {
        let shots = if mode == EvalMode::Shots { config.eval.shots } else { 0 };
        let grid = EvalGrid::uniform(config.eval.grid_points, shots)?;
        evals.push((mode, error_table(interferometer, &model, &grid, seed.wrapping_add(EVAL_SEED_OFFSET))?));
    }
    let jacobian = model_jacobian(interferometer, &model, config.eval.jacobian_points)?;
    let analysis = if config.analysis.enabled {
        let grid = EvalGrid::uniform(config.analysis.grid_points, 0)?;
        let heat = feature_heatmap(interferometer, model.circuit(), &grid);
        let feature_projection = pca_2d(&heat)?;
        let latent_projection = match model.as_hybrid() {
            Some(h) => Some(pca_2d(&latent_matrix(interferometer, h, &grid))?),
            None => None,
        };
        Some(AnalysisOutput { grid, heatmap: heat.rows, feature_projection, latent_projection })
    } else {
        None
    };
    let activation = (spec.kind != ModelKind::Vqi).then_some(spec.activation);
    let record = ModelRecordFile {
        label: spec.label.clone(),
        kind: spec.kind,
        activation,
        run,
        seed,
        qfi: interferometer.qfi(model.circuit()),
        model,
        trace,
    };
    Ok(ModelArtifact { record, evals, jacobian, analysis, snapshots })
}

// ---- persistence ----

#[derive(Serialize, Deserialize)]
pub(crate) struct EvalRow {
    pub run: usize,
    pub phase: f64,
    pub phi_est: f64,
    pub delta_phi: f64,
    pub swpe_db: f64,
    pub mode: EvalMode,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct JacobianRow {
    pub model: String,
    pub j_mean: f64,
    pub j_var: f64,
    pub j_pos_frac: f64,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TrajectoryRow {
    pub epoch: usize,
    pub qfi: f64,
    pub swpe_median: f64,
}

#[derive(Serialize)]
struct LossRow {
    epoch: usize,
    loss: f64,
}

#[derive(Serialize)]
struct HeatmapRow {
    phase: f64,
    m: f64,
    probability: f64,
}

#[derive(Serialize)]
struct ProjectionRow {
    phase: f64,
    pc1: f64,
    pc2: f64,
    ev1: f64,
    ev2: f64,
}

pub(crate) fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::parse(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::parse(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::parse(path, e))?;
    write_text(path, &text)
}

fn write_projection(path: &Path, p: &Projection2D) -> Result<()> {
    write_csv(
        path,
        p.phases.iter().zip(&p.points).map(|(&phase, &(pc1, pc2))| ProjectionRow {
            phase,
            pc1,
            pc2,
            ev1: p.explained.0,
            ev2: p.explained.1,
        }),
    )
}

/// Writes one run directory: `run.json` plus one subdirectory per
/// completed model.
pub fn write_run(root: &Path, artifact: &RunArtifact) -> Result<PathBuf> {
    let dir = root.join(run_dir_name(artifact.status.run));
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    }
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    for m in &artifact.models {
        write_model(&dir.join(&m.record.label), m)?;
    }
    write_json(&dir.join(RUN_FILE), &artifact.status)?;
    Ok(dir)
}

fn write_model(dir: &Path, m: &ModelArtifact) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let rec = &m.record;
    write_json(&dir.join(MODEL_FILE), rec)?;
    write_csv(
        &dir.join("loss.csv"),
        rec.trace.losses.iter().enumerate().map(|(i, &loss)| LossRow { epoch: i + 1, loss }),
    )?;
    write_csv(
        &dir.join("trajectory.csv"),
        rec.trace.evals.iter().map(|e| TrajectoryRow { epoch: e.epoch, qfi: e.qfi, swpe_median: e.swpe_median }),
    )?;
    write_csv(
        &dir.join("eval.csv"),
        m.evals.iter().flat_map(|(mode, t)| {
            (0..t.phases.len()).map(move |i| EvalRow {
                run: rec.run,
                phase: t.phases[i],
                phi_est: t.estimates[i],
                delta_phi: t.errors[i],
                swpe_db: t.swpe_db[i],
                mode: *mode,
            })
        }),
    )?;
    write_csv(
        &dir.join("jacobian.csv"),
        [JacobianRow {
            model: rec.label.clone(),
            j_mean: m.jacobian.mean,
            j_var: m.jacobian.variance,
            j_pos_frac: m.jacobian.positive_fraction(),
        }],
    )?;
    if let Some(a) = &m.analysis {
        let n = a.heatmap.first().map_or(0, Vec::len);
        let spin = (n as f64 - 1.0) / 2.0;
        write_csv(
            &dir.join("heatmap.csv"),
            a.grid.phases.iter().zip(&a.heatmap).flat_map(|(&phase, row)| {
                row.iter().enumerate().map(move |(k, &probability)| HeatmapRow { phase, m: spin - k as f64, probability })
            }),
        )?;
        write_projection(&dir.join("projection_feature.csv"), &a.feature_projection)?;
        if let Some(p) = &a.latent_projection {
            write_projection(&dir.join("projection_latent.csv"), p)?;
        }
    }
    if !m.snapshots.is_empty() {
        let sdir = dir.join("snapshots");
        fs::create_dir_all(&sdir).map_err(|e| HarnessError::io(&sdir, e))?;
        for s in &m.snapshots {
            write_json(&sdir.join(format!("epoch_{:05}.json", s.epoch)), s)?;
        }
    }
    Ok(())
}
