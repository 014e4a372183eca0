//! Experiment harness: TOML configs, the four shipped presets, seeded
//! multi-run orchestration with per-run artifact directories, and summary
//! reports.
//!
//! Run `i` of an experiment uses seed `base_seed + i` for circuit and
//! decoder initialization (ChaCha8 streams 1 and 2) and
//! `base_seed + i + 2^32` for shot sampling (stream = phase index).

pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod report;

pub use config::{EvalMode, ExperimentConfig, ModelKind, ModelSpec};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentOutcome, RunArtifact, RunOptions};
pub use presets::{preset, presets};
pub use report::{report, Report};
