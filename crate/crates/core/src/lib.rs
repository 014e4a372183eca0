//! Simulation and training toolkit for global phase estimation with
//! collective-spin variational interferometers.
//!
//! A shallow Ramsey-type circuit on the Dicke subspace of `N` spins turns a
//! phase into a measurement distribution; a small neural decoder maps the
//! distribution to `(sin, cos)` of the estimate. Circuit and decoder are
//! trained jointly with a circular loss over the full `[-pi, pi)` range.
//! An affine estimator trained on a narrow Gaussian prior serves as the
//! local baseline.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`, which is what the experiment
//! harness uses.

pub mod analysis;
pub mod decoder;
pub mod error;
pub mod interferometer;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod spin;
pub mod training;

pub use decoder::{phase_estimate, Activation, Parity};
pub use error::{Error, Result};
pub use metrics::{swpe_db, wrap_phase, wrapped_error};
pub use model::PhaseEstimator;
pub use scalar::Real;
pub use spin::Axis;
pub use training::{GaussianPrior, TrainConfig};

pub type Complex = num_complex::Complex<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
pub type DickeSpace = spin::DickeSpace<f64>;
pub type SpinOperators = spin::SpinOperators<f64>;
pub type UnitaryGate = spin::UnitaryGate<f64>;
pub type Interferometer = interferometer::Interferometer<f64>;
pub type CompiledCircuit = interferometer::CompiledCircuit<f64>;
pub type CircuitParams = interferometer::CircuitParams<f64>;
pub type LayerAngles = interferometer::LayerAngles<f64>;
pub type ProbabilityVector = interferometer::ProbabilityVector<f64>;
pub type Decoder = decoder::Decoder<f64>;
pub type HybridModel = model::HybridModel<f64>;
pub type VqiModel = model::VqiModel<f64>;
pub type AnyModel = model::AnyModel<f64>;
pub type EvalGrid = metrics::EvalGrid<f64>;
pub type ErrorTable = metrics::ErrorTable<f64>;
pub type JacobianStats = metrics::JacobianStats<f64>;
pub type Summary = metrics::Summary<f64>;
pub type TrainTrace = training::TrainTrace<f64>;
pub type EvalPoint = training::EvalPoint<f64>;
pub type FeatureMatrix = analysis::FeatureMatrix<f64>;
pub type Projection2D = analysis::Projection2D<f64>;
pub type Snapshot = analysis::Snapshot<f64>;
