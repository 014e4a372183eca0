//! The four experiment designs shipped with the harness.

use globalphase::Activation;

use crate::config::{AnalysisConfig, EvalConfig, EvalMode, ExperimentConfig, ModelKind, ModelSpec, SnapshotConfig};
use crate::error::{HarnessError, Result};

pub const PRESET_NAMES: [&str; 4] = ["fig2_global", "fig3_representation", "fig4_dynamics", "fig5_activations"];

fn hybrid(label: &str, activation: Activation) -> ModelSpec {
    ModelSpec { label: label.into(), kind: ModelKind::Vqcnni, activation, reference: None }
}

fn vqi() -> ModelSpec {
    ModelSpec { label: "vqi".into(), kind: ModelKind::Vqi, activation: Activation::Softsign, reference: None }
}

fn exact_only() -> EvalConfig {
    EvalConfig { shots: 0, modes: vec![EvalMode::Exact], ..EvalConfig::default() }
}

/// Global estimation under finite shots against the affine baseline.
pub fn fig2_global() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig2_global".into(),
        runs: 20,
        models: vec![hybrid("vqcnni", Activation::Softsign), vqi()],
        eval: EvalConfig { shots: 1_000_000, modes: vec![EvalMode::Exact, EvalMode::Shots], ..EvalConfig::default() },
        ..ExperimentConfig::default()
    }
}

/// Joint vs decoupled training, with feature heatmaps and projections.
pub fn fig3_representation() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig3_representation".into(),
        runs: 20,
        models: vec![
            vqi(),
            hybrid("vqcnni", Activation::Softsign),
            ModelSpec {
                label: "vqcnni_fixed".into(),
                kind: ModelKind::VqcnniFixed,
                activation: Activation::Softsign,
                reference: Some("vqi".into()),
            },
        ],
        eval: exact_only(),
        analysis: AnalysisConfig { enabled: true, ..AnalysisConfig::default() },
        ..ExperimentConfig::default()
    }
}

/// Joint training with a snapshot at every eval epoch.
pub fn fig4_dynamics() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig4_dynamics".into(),
        runs: 20,
        models: vec![hybrid("vqcnni", Activation::Softsign)],
        eval: exact_only(),
        snapshots: SnapshotConfig { enabled: true, ..SnapshotConfig::default() },
        ..ExperimentConfig::default()
    }
}

/// One joint model per decoder activation, seed-matched.
pub fn fig5_activations() -> ExperimentConfig {
    ExperimentConfig {
        name: "fig5_activations".into(),
        runs: 10,
        models: Activation::ABLATION.iter().map(|&a| hybrid(a.name(), a)).collect(),
        eval: exact_only(),
        analysis: AnalysisConfig { enabled: true, ..AnalysisConfig::default() },
        ..ExperimentConfig::default()
    }
}

pub fn presets() -> Vec<(&'static str, ExperimentConfig)> {
    vec![
        ("fig2_global", fig2_global()),
        ("fig3_representation", fig3_representation()),
        ("fig4_dynamics", fig4_dynamics()),
        ("fig5_activations", fig5_activations()),
    ]
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
        .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for (name, cfg) in presets() {
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name, name);
        }
        assert_eq!(presets().len(), PRESET_NAMES.len());
    }

    #[test]
    fn fig2_matches_design() {
        let cfg = fig2_global();
        assert_eq!((cfg.runs, cfg.eval.shots), (20, 1_000_000));
        let kinds: Vec<_> = cfg.models.iter().map(|m| (m.kind, m.activation)).collect();
        assert_eq!(kinds[0], (ModelKind::Vqcnni, Activation::Softsign));
        assert_eq!(kinds[1].0, ModelKind::Vqi);
    }

    #[test]
    fn fig3_is_exact_with_all_three_kinds() {
        let cfg = fig3_representation();
        assert_eq!(cfg.eval.modes, vec![EvalMode::Exact]);
        let kinds: Vec<_> = cfg.models.iter().map(|m| m.kind).collect();
        assert_eq!(kinds, vec![ModelKind::Vqi, ModelKind::Vqcnni, ModelKind::VqcnniFixed]);
    }

    #[test]
    fn fig5_covers_six_activations() {
        let acts: Vec<_> = fig5_activations().models.iter().map(|m| m.activation).collect();
        assert_eq!(acts, Activation::ABLATION.to_vec());
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("fig9"), Err(HarnessError::UnknownPreset(_))));
    }
}
