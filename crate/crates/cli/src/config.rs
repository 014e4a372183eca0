use std::path::{Path, PathBuf};

use globalphase::{Activation, GaussianPrior, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Circuit and decoder trained jointly with the circular loss.
    Vqcnni,
    /// Affine estimator trained with BMSE under a narrow prior.
    Vqi,
    /// Decoder trained on the frozen circuit of a `vqi` model.
    VqcnniFixed,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Vqcnni => "vqcnni",
            ModelKind::Vqi => "vqi",
            ModelKind::VqcnniFixed => "vqcnni_fixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub label: String,
    pub kind: ModelKind,
    /// Decoder activation; ignored for `vqi`.
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// For `vqcnni_fixed`: label of a `vqi` model in the same experiment, or
    /// a path to a `model.json` written by a `vqi` run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

fn default_activation() -> Activation {
    Activation::Softsign
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    Shots,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Exact => "exact",
            EvalMode::Shots => "shots",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub grid_points: usize,
    pub shots: u64,
    pub modes: Vec<EvalMode>,
    pub jacobian_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { grid_points: 512, shots: 1_000_000, modes: vec![EvalMode::Exact, EvalMode::Shots], jacobian_points: 512 }
    }
}

/// Heatmap and PCA outputs written next to each final model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub enabled: bool,
    pub grid_points: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { enabled: false, grid_points: 128 }
    }
}

/// Per-eval-epoch snapshots of hybrid models during training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotConfig {
    pub enabled: bool,
    pub grid_points: usize,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        Self { enabled: false, grid_points: 64 }
    }
}

/// Everything that determines an experiment. Run `i` uses seed
/// `base_seed + i` for every model, so models within a run are seed-matched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n_particles: usize,
    pub layers_enc: usize,
    pub layers_dec: usize,
    pub hidden: Vec<usize>,
    pub runs: usize,
    pub base_seed: u64,
    /// Worker threads for independent runs; 0 uses all cores.
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub models: Vec<ModelSpec>,
    pub train: TrainConfig,
    pub prior: GaussianPrior,
    pub eval: EvalConfig,
    pub analysis: AnalysisConfig,
    pub snapshots: SnapshotConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            n_particles: 8,
            layers_enc: 1,
            layers_dec: 1,
            hidden: vec![64, 64, 64],
            runs: 20,
            base_seed: 0,
            workers: 1,
            output_dir: None,
            models: vec![ModelSpec {
                label: "vqcnni".into(),
                kind: ModelKind::Vqcnni,
                activation: Activation::Softsign,
                reference: None,
            }],
            train: TrainConfig::default(),
            prior: GaussianPrior::default(),
            eval: EvalConfig::default(),
            analysis: AnalysisConfig::default(),
            snapshots: SnapshotConfig::default(),
        }
    }
}

/// Where a `vqcnni_fixed` model takes its frozen circuit from.
#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    Label(usize),
    File(PathBuf),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies `key=value` overrides; keys are dotted paths into the TOML
    /// form (`train.max_iters=500`, `eval.shots=0`). Values parse as TOML
    /// and fall back to plain strings.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(&self.to_toml()).expect("round trip");
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("override `{item}` is not key=value")))?;
            let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.to_string()));
            let parts: Vec<&str> = key.trim().split('.').collect();
            let (last, parents) = parts.split_last().expect("split yields one part");
            let mut table = &mut doc;
            for p in parents {
                table = table
                    .entry(p.to_string())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| HarnessError::Config(format!("`{p}` in `{key}` is not a table")))?;
            }
            table.insert(last.to_string(), value);
        }
        let text = toml::to_string(&doc).expect("table serializes");
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.n_particles == 0 {
            return fail("n_particles must be a positive integer".into());
        }
        if self.layers_enc == 0 || self.layers_dec == 0 {
            return fail("layers_enc and layers_dec must be at least 1".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return fail("hidden must list at least one nonzero width".into());
        }
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.models.is_empty() {
            return fail("at least one model is required".into());
        }
        if self.eval.grid_points < 2 || self.eval.jacobian_points < globalphase::metrics::MIN_JACOBIAN_GRID {
            return fail("eval grid too small".into());
        }
        if self.eval.modes.contains(&EvalMode::Shots) && self.eval.shots == 0 {
            return fail("shots mode requested with eval.shots = 0".into());
        }
        self.train.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.prior.quadrature::<f64>().map_err(|e| HarnessError::Config(e.to_string()))?;
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].iter().any(|o| o.label == m.label) {
                return fail(format!("duplicate model label `{}`", m.label));
            }
            if m.label.is_empty() || m.label.contains(['/', '\\']) {
                return fail(format!("invalid model label `{}`", m.label));
            }
            if m.kind == ModelKind::VqcnniFixed {
                self.reference(i)?;
            }
        }
        Ok(())
    }

    /// Resolves the frozen-circuit source of model `index`.
    pub fn reference(&self, index: usize) -> Result<Reference> {
        let spec = &self.models[index];
        let Some(r) = &spec.reference else {
            return Err(HarnessError::Config(format!("model `{}` (vqcnni_fixed) needs a `reference` to a vqi model", spec.label)));
        };
        if let Some(pos) = self.models.iter().position(|m| &m.label == r) {
            if self.models[pos].kind != ModelKind::Vqi {
                return Err(HarnessError::Config(format!("reference `{r}` of `{}` is not a vqi model", spec.label)));
            }
            if pos > index {
                return Err(HarnessError::Config(format!("reference `{r}` must be listed before `{}`", spec.label)));
            }
            return Ok(Reference::Label(pos));
        }
        let path = PathBuf::from(r);
        if path.is_file() {
            Ok(Reference::File(path))
        } else {
            Err(HarnessError::Config(format!("reference `{r}` of `{}` is neither a vqi label nor a model file", spec.label)))
        }
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.base_seed + run as u64
    }
}
