//! Summary tables over an artifact set, in memory or on disk.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use globalphase::metrics::median;
use globalphase::Summary;
use globalphase::{Activation, EvalPoint, Parity};

use crate::config::{EvalMode, ExperimentConfig, ModelKind};
use crate::error::{HarnessError, Result};
use crate::experiment::{
    write_text, EvalRow, JacobianRow, ModelFailure, ModelRecordFile, RunArtifact, RunStatus, TrajectoryRow, CONFIG_FILE,
    MODEL_FILE, RUN_FILE,
};

pub const NO_RUNS: &str = "no runs";

/// The per-run numbers the report needs for one model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelRecord {
    pub label: String,
    pub kind: ModelKind,
    pub activation: Option<Activation>,
    pub run: usize,
    pub qfi: f64,
    pub phases: Vec<f64>,
    pub swpe: Vec<(EvalMode, Vec<f64>)>,
    pub j_mean: f64,
    pub j_var: f64,
    pub j_pos_frac: f64,
    pub trajectory: Vec<EvalPoint>,
}

impl ModelRecord {
    pub fn swpe(&self, mode: EvalMode) -> Option<&[f64]> {
        self.swpe.iter().find(|(m, _)| *m == mode).map(|(_, v)| v.as_slice())
    }

    /// Median SWPE of this run over the evaluation grid.
    pub fn median_swpe(&self, mode: EvalMode) -> Option<f64> {
        self.swpe(mode).filter(|v| !v.is_empty()).map(median)
    }

    /// Eval point with the largest QFI, earliest on ties.
    pub fn qfi_peak(&self) -> Option<&EvalPoint> {
        self.trajectory.iter().fold(None, |best: Option<&EvalPoint>, e| match best {
            Some(b) if b.qfi >= e.qfi => Some(b),
            _ => Some(e),
        })
    }

    pub fn final_eval(&self) -> Option<&EvalPoint> {
        self.trajectory.last()
    }

    /// QFI saturates before the end of training while SWPE keeps falling.
    pub fn dynamics_ok(&self) -> bool {
        match (self.qfi_peak(), self.final_eval()) {
            (Some(p), Some(f)) => p.epoch < f.epoch && f.swpe_median <= p.swpe_median,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSummary {
    pub label: String,
    pub kind: ModelKind,
    pub activation: Option<Activation>,
    pub runs: usize,
    pub phases: Vec<f64>,
    /// Per-phase distribution across runs, per mode.
    pub by_phase: Vec<(EvalMode, Vec<Summary>)>,
    pub j_mean: f64,
    /// Mean over runs of the per-run Jacobian variance.
    pub j_var: f64,
    pub j_pos_frac_min: f64,
    pub qfi_mean: f64,
    /// Median over runs of each run's grid-median SWPE, per mode.
    pub run_median_swpe: Vec<(EvalMode, f64)>,
}

impl ModelSummary {
    /// Median over the grid phases selected by `keep` of the per-phase
    /// median across runs.
    pub fn median_swpe_where(&self, mode: EvalMode, keep: impl Fn(f64) -> bool) -> Option<f64> {
        let (_, rows) = self.by_phase.iter().find(|(m, _)| *m == mode)?;
        let v: Vec<f64> = self.phases.iter().zip(rows).filter(|(&p, _)| keep(p)).map(|(_, s)| s.median).collect();
        (!v.is_empty()).then(|| median(&v))
    }

    pub fn median_swpe(&self, mode: EvalMode) -> Option<f64> {
        self.median_swpe_where(mode, |_| true)
    }

    pub fn run_median_swpe(&self, mode: EvalMode) -> Option<f64> {
        self.run_median_swpe.iter().find(|(m, _)| *m == mode).map(|&(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationEntry {
    pub label: String,
    pub activation: Activation,
    pub j_var: f64,
}

/// Activation models ordered by mean Jacobian variance.
#[derive(Clone, Debug, PartialEq)]
pub struct Ablation {
    pub entries: Vec<AblationEntry>,
    /// Every odd activation has a smaller mean variance than every
    /// asymmetric one (both groups present).
    pub odd_first: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub records: Vec<ModelRecord>,
    pub failures: Vec<(usize, ModelFailure)>,
    /// Problems that make the artifact set incomplete.
    pub partial: Vec<String>,
    pub models: Vec<ModelSummary>,
    pub ablation: Option<Ablation>,
}

impl Report {
    pub fn build(
        experiment: &str,
        mut records: Vec<ModelRecord>,
        failures: Vec<(usize, ModelFailure)>,
        partial: Vec<String>,
        label_order: &[String],
    ) -> Self {
        let rank = |l: &str| label_order.iter().position(|x| x == l).unwrap_or(usize::MAX);
        records.sort_by(|a, b| (rank(&a.label), &a.label, a.run).cmp(&(rank(&b.label), &b.label, b.run)));
        let mut labels: Vec<&str> = Vec::new();
        for r in &records {
            if !labels.contains(&r.label.as_str()) {
                labels.push(&r.label);
            }
        }
        let models: Vec<ModelSummary> = labels
            .iter()
            .map(|l| summarize(&records.iter().filter(|r| r.label == *l).collect::<Vec<_>>()))
            .collect();
        let ablation = ablation(&models);
        Self { experiment: experiment.to_string(), records, failures, partial, models, ablation }
    }

    pub fn from_artifacts(experiment: &str, runs: &[RunArtifact]) -> Self {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        let mut order = Vec::new();
        for r in runs {
            for m in &r.models {
                let rec = &m.record;
                if !order.contains(&rec.label) {
                    order.push(rec.label.clone());
                }
                records.push(ModelRecord {
                    label: rec.label.clone(),
                    kind: rec.kind,
                    activation: rec.activation,
                    run: rec.run,
                    qfi: rec.qfi,
                    phases: m.evals.first().map(|(_, t)| t.phases.clone()).unwrap_or_default(),
                    swpe: m.evals.iter().map(|(mode, t)| (*mode, t.swpe_db.clone())).collect(),
                    j_mean: m.jacobian.mean,
                    j_var: m.jacobian.variance,
                    j_pos_frac: m.jacobian.positive_fraction(),
                    trajectory: rec.trace.evals.clone(),
                });
            }
            failures.extend(r.status.failures.iter().map(|f| (r.status.run, f.clone())));
        }
        Self::build(experiment, records, failures, Vec::new(), &order)
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty() && self.failures.is_empty()
    }

    pub fn is_partial(&self) -> bool {
        !self.partial.is_empty()
    }

    pub fn model(&self, label: &str) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.label == label)
    }

    pub fn records_of<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a ModelRecord> + 'a {
        self.records.iter().filter(move |r| r.label == label)
    }

    /// Per-run grid-median SWPE of two models over runs where both exist.
    pub fn paired(&self, a: &str, b: &str, mode: EvalMode) -> Vec<(usize, f64, f64)> {
        self.records_of(a)
            .filter_map(|ra| {
                let rb = self.records_of(b).find(|rb| rb.run == ra.run)?;
                Some((ra.run, ra.median_swpe(mode)?, rb.median_swpe(mode)?))
            })
            .collect()
    }

    /// Writes `summary.csv`, `swpe_by_phase.csv`, `runs.csv`,
    /// `ablation.csv` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        write_text(&dir.join("summary.csv"), &self.summary_csv())?;
        write_text(&dir.join("swpe_by_phase.csv"), &self.by_phase_csv())?;
        write_text(&dir.join("runs.csv"), &self.runs_csv())?;
        write_text(&dir.join("ablation.csv"), &self.ablation_csv())?;
        write_text(&dir.join("report.txt"), &self.to_string())
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "label,kind,activation,runs,median_swpe_exact,median_swpe_shots,run_median_swpe_exact,run_median_swpe_shots,j_mean,j_var,j_pos_frac_min,qfi_mean\n",
        );
        for m in &self.models {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                m.label,
                m.kind.name(),
                m.activation.map_or("", |a| a.name()),
                m.runs,
                opt(m.median_swpe(EvalMode::Exact)),
                opt(m.median_swpe(EvalMode::Shots)),
                opt(m.run_median_swpe(EvalMode::Exact)),
                opt(m.run_median_swpe(EvalMode::Shots)),
                m.j_mean,
                m.j_var,
                m.j_pos_frac_min,
                m.qfi_mean
            );
        }
        s
    }

    fn by_phase_csv(&self) -> String {
        let mut s = String::from("label,mode,phase,median,q25,q75,mean,p5,p95\n");
        for m in &self.models {
            for (mode, rows) in &m.by_phase {
                for (p, r) in m.phases.iter().zip(rows) {
                    let _ = writeln!(
                        s,
                        "{},{},{p},{},{},{},{},{},{}",
                        m.label,
                        mode.name(),
                        r.median,
                        r.q25,
                        r.q75,
                        r.mean,
                        r.p5,
                        r.p95
                    );
                }
            }
        }
        s
    }

    fn runs_csv(&self) -> String {
        let mut s = String::from(
            "run,label,status,median_swpe_exact,median_swpe_shots,j_mean,j_var,j_pos_frac,qfi,qfi_peak_epoch,final_epoch,dynamics_ok\n",
        );
        let mut rows: Vec<(usize, String, String)> = self
            .records
            .iter()
            .map(|r| {
                let line = format!(
                    "ok,{},{},{},{},{},{},{},{},{}",
                    opt(r.median_swpe(EvalMode::Exact)),
                    opt(r.median_swpe(EvalMode::Shots)),
                    r.j_mean,
                    r.j_var,
                    r.j_pos_frac,
                    r.qfi,
                    r.qfi_peak().map_or(String::new(), |p| p.epoch.to_string()),
                    r.final_eval().map_or(String::new(), |p| p.epoch.to_string()),
                    r.dynamics_ok()
                );
                (r.run, r.label.clone(), line)
            })
            .collect();
        rows.extend(self.failures.iter().map(|(run, f)| (*run, f.label.clone(), "failed,,,,,,,,,".to_string())));
        rows.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        for (run, label, line) in rows {
            let _ = writeln!(s, "{run},{label},{line}");
        }
        s
    }

    fn ablation_csv(&self) -> String {
        let mut s = String::from("rank,label,activation,parity,j_var\n");
        if let Some(a) = &self.ablation {
            for (i, e) in a.entries.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{},{}", i + 1, e.label, e.activation.name(), parity_name(e.activation), e.j_var);
            }
        }
        s
    }
}

fn parity_name(a: Activation) -> &'static str {
    match a.parity() {
        Parity::Odd => "odd",
        Parity::Asymmetric => "asymmetric",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn summarize(records: &[&ModelRecord]) -> ModelSummary {
    let first = records[0];
    let n = records.len() as f64;
    let mut by_phase = Vec::new();
    let mut run_median_swpe = Vec::new();
    for (mode, _) in &first.swpe {
        let per_run: Vec<&[f64]> = records.iter().filter_map(|r| r.swpe(*mode)).collect();
        if per_run.len() != records.len() || per_run.iter().any(|v| v.len() != first.phases.len()) {
            continue;
        }
        let rows = (0..first.phases.len())
            .map(|i| Summary::of(&per_run.iter().map(|v| v[i]).collect::<Vec<_>>()))
            .collect();
        by_phase.push((*mode, rows));
        let medians: Vec<f64> = records.iter().filter_map(|r| r.median_swpe(*mode)).collect();
        run_median_swpe.push((*mode, median(&medians)));
    }
    ModelSummary {
        label: first.label.clone(),
        kind: first.kind,
        activation: first.activation,
        runs: records.len(),
        phases: first.phases.clone(),
        by_phase,
        j_mean: records.iter().map(|r| r.j_mean).sum::<f64>() / n,
        j_var: records.iter().map(|r| r.j_var).sum::<f64>() / n,
        j_pos_frac_min: records.iter().map(|r| r.j_pos_frac).fold(f64::INFINITY, f64::min),
        qfi_mean: records.iter().map(|r| r.qfi).sum::<f64>() / n,
        run_median_swpe,
    }
}

fn ablation(models: &[ModelSummary]) -> Option<Ablation> {
    let mut entries: Vec<AblationEntry> = models
        .iter()
        .filter(|m| m.kind == ModelKind::Vqcnni)
        .filter_map(|m| Some(AblationEntry { label: m.label.clone(), activation: m.activation?, j_var: m.j_var }))
        .collect();
    let mut acts: Vec<Activation> = entries.iter().map(|e| e.activation).collect();
    acts.dedup();
    if acts.len() < 2 {
        return None;
    }
    entries.sort_by(|a, b| a.j_var.total_cmp(&b.j_var).then_with(|| a.label.cmp(&b.label)));
    let group = |p: Parity| entries.iter().filter(move |e| e.activation.parity() == p).map(|e| e.j_var);
    let odd_max = group(Parity::Odd).fold(f64::NEG_INFINITY, f64::max);
    let asym_min = group(Parity::Asymmetric).fold(f64::INFINITY, f64::min);
    let both = group(Parity::Odd).next().is_some() && group(Parity::Asymmetric).next().is_some();
    Some(Ablation { entries, odd_first: both && odd_max < asym_min })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: {}", self.experiment)?;
        if self.is_empty() {
            return writeln!(f, "{NO_RUNS}");
        }
        if self.is_partial() {
            writeln!(f, "PARTIAL artifact set:")?;
            for p in &self.partial {
                writeln!(f, "  {p}")?;
            }
        }
        writeln!(
            f,
            "{:<16} {:>5} {:>12} {:>12} {:>9} {:>11} {:>8} {:>8}",
            "model", "runs", "swpe_exact", "swpe_shots", "J_mean", "J_var", "J>0 min", "QFI"
        )?;
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2}"));
        for m in &self.models {
            writeln!(
                f,
                "{:<16} {:>5} {:>12} {:>12} {:>9.4} {:>11.3e} {:>8.3} {:>8.3}",
                m.label,
                m.runs,
                cell(m.median_swpe(EvalMode::Exact)),
                cell(m.median_swpe(EvalMode::Shots)),
                m.j_mean,
                m.j_var,
                m.j_pos_frac_min,
                m.qfi_mean
            )?;
        }
        if let Some(a) = &self.ablation {
            writeln!(f, "\nactivations by mean J variance:")?;
            for (i, e) in a.entries.iter().enumerate() {
                writeln!(f, "  {}. {:<16} {:<10} {:.3e}", i + 1, e.label, parity_name(e.activation), e.j_var)?;
            }
            writeln!(f, "odd activations first: {}", if a.odd_first { "yes" } else { "no" })?;
        }
        if !self.failures.is_empty() {
            writeln!(f, "\nfailures:")?;
            for (run, fl) in &self.failures {
                writeln!(f, "  run {run} {}: {}", fl.label, fl.message)?;
            }
        }
        Ok(())
    }
}

// ---- loading ----

fn read_csv<R: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<Vec<R>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    r.deserialize().collect::<std::result::Result<Vec<R>, _>>().map_err(|e| format!("{}: {e}", path.display()))
}

fn load_model(dir: &Path) -> std::result::Result<ModelRecord, String> {
    let path = dir.join(MODEL_FILE);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let rec: ModelRecordFile = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let evals: Vec<EvalRow> = read_csv(&dir.join("eval.csv"))?;
    let jac: Vec<JacobianRow> = read_csv(&dir.join("jacobian.csv"))?;
    let traj: Vec<TrajectoryRow> = read_csv(&dir.join("trajectory.csv"))?;
    let jac = jac.into_iter().next().ok_or_else(|| format!("{}: empty jacobian.csv", dir.display()))?;
    let mut swpe: Vec<(EvalMode, Vec<f64>)> = Vec::new();
    let mut phases = Vec::new();
    for row in &evals {
        match swpe.iter_mut().find(|(m, _)| *m == row.mode) {
            Some((_, v)) => v.push(row.swpe_db),
            None => swpe.push((row.mode, vec![row.swpe_db])),
        }
        if swpe.len() == 1 {
            phases.push(row.phase);
        }
    }
    Ok(ModelRecord {
        label: rec.label,
        kind: rec.kind,
        activation: rec.activation,
        run: rec.run,
        qfi: rec.qfi,
        phases,
        swpe,
        j_mean: jac.j_mean,
        j_var: jac.j_var,
        j_pos_frac: jac.j_pos_frac,
        trajectory: traj.into_iter().map(|t| EvalPoint { epoch: t.epoch, qfi: t.qfi, swpe_median: t.swpe_median }).collect(),
    })
}

/// Builds the report for an experiment directory. Missing or unreadable
/// files make the report partial instead of failing it.
pub fn report(dir: &Path) -> Result<Report> {
    if !dir.is_dir() {
        return Err(HarnessError::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let config = fs::read_to_string(dir.join(CONFIG_FILE)).ok().and_then(|t| ExperimentConfig::from_toml(&t).ok());
    let name = config.as_ref().map_or_else(
        || dir.file_name().map_or_else(|| "experiment".into(), |n| n.to_string_lossy().into_owned()),
        |c| c.name.clone(),
    );
    let order: Vec<String> = config.as_ref().map_or_else(Vec::new, |c| c.models.iter().map(|m| m.label.clone()).collect());
    let mut run_dirs: Vec<_> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("run_")))
        .collect();
    run_dirs.sort();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut partial = Vec::new();
    for rd in run_dirs {
        let status: RunStatus = match fs::read_to_string(rd.join(RUN_FILE))
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
        {
            Ok(s) => s,
            Err(e) => {
                partial.push(format!("{}: {e}", rd.join(RUN_FILE).display()));
                continue;
            }
        };
        failures.extend(status.failures.iter().map(|f| (status.run, f.clone())));
        for label in &status.completed {
            match load_model(&rd.join(label)) {
                Ok(r) => records.push(r),
                Err(e) => partial.push(e),
            }
        }
    }
    if let Some(c) = &config {
        for run in 0..c.runs {
            let seen = records.iter().any(|r| r.run == run) || failures.iter().any(|(r, _)| *r == run);
            if !seen && !partial.iter().any(|p| p.contains(&crate::experiment::run_dir_name(run))) {
                partial.push(format!("{} missing", crate::experiment::run_dir_name(run)));
            }
        }
    }
    Ok(Report::build(&name, records, failures, partial, &order))
}
