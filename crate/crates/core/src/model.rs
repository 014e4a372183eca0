//! Trained estimators: the hybrid circuit + decoder, and the affine
//! variational-interferometer baseline.

use serde::{Deserialize, Serialize};

use crate::decoder::{Activation, Decoder};
use crate::error::{Error, Result};
use crate::interferometer::CircuitParams;
use crate::metrics::wrap_phase;
use crate::scalar::Real;

/// Anything that turns a measured distribution into a phase estimate.
pub trait PhaseEstimator<T: Real> {
    fn circuit(&self) -> &CircuitParams<T>;

    /// Phase estimate in `[-pi, pi)` from a (possibly empirical) distribution.
    fn estimate(&self, probabilities: &[T]) -> T;
}

/// Circuit angles plus neural decoder, trained jointly or with the circuit
/// frozen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HybridModel<T> {
    pub circuit: CircuitParams<T>,
    pub decoder: Decoder<T>,
}

impl<T: Real> HybridModel<T> {
    pub fn new(circuit: CircuitParams<T>, decoder: Decoder<T>, n_particles: usize) -> Result<Self> {
        if decoder.input_width() != n_particles + 1 {
            return Err(Error::DimensionMismatch { expected: n_particles + 1, actual: decoder.input_width() });
        }
        Ok(Self { circuit, decoder })
    }

    pub fn activation(&self) -> Activation {
        self.decoder.activation()
    }

    /// Penultimate-layer features for one distribution.
    pub fn latent(&self, probabilities: &[T]) -> Vec<T> {
        self.decoder.forward(probabilities).expect("width checked at construction").latent().to_vec()
    }

    pub fn n_params(&self) -> usize {
        self.circuit.len() + self.decoder.n_params()
    }

    /// Circuit angles followed by decoder parameters.
    pub fn to_flat(&self) -> Vec<T> {
        let mut v = self.circuit.to_flat();
        v.extend_from_slice(self.decoder.params());
        v
    }

    pub fn set_flat(&mut self, flat: &[T]) {
        let nc = self.circuit.len();
        self.circuit.set_flat(&flat[..nc]);
        self.decoder.params_mut().copy_from_slice(&flat[nc..]);
    }
}

impl<T: Real> PhaseEstimator<T> for HybridModel<T> {
    fn circuit(&self) -> &CircuitParams<T> {
        &self.circuit
    }

    fn estimate(&self, probabilities: &[T]) -> T {
        self.decoder.forward(probabilities).expect("width checked at construction").phase()
    }
}

/// Baseline estimator `phi_est(m) = slope * m + offset`, averaged over shots
/// and wrapped into `[-pi, pi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VqiModel<T> {
    pub circuit: CircuitParams<T>,
    pub slope: T,
    pub offset: T,
}

impl<T: Real> VqiModel<T> {
    /// Per-outcome estimate (unwrapped).
    pub fn outcome_estimate(&self, m: T) -> T {
        self.slope * m + self.offset
    }

    /// Mean of the per-outcome estimates under `probabilities`, unwrapped.
    pub fn mean_estimate(&self, probabilities: &[T]) -> T {
        let n = probabilities.len() - 1;
        let half = T::from_usize_lossy(n) * T::lit(0.5);
        let mean_m: T = probabilities.iter().enumerate().map(|(k, &p)| p * (half - T::from_usize_lossy(k))).sum();
        self.outcome_estimate(mean_m)
    }

    pub fn n_params(&self) -> usize {
        self.circuit.len() + 2
    }

    pub fn to_flat(&self) -> Vec<T> {
        let mut v = self.circuit.to_flat();
        v.push(self.slope);
        v.push(self.offset);
        v
    }

    pub fn set_flat(&mut self, flat: &[T]) {
        let nc = self.circuit.len();
        self.circuit.set_flat(&flat[..nc]);
        self.slope = flat[nc];
        self.offset = flat[nc + 1];
    }
}

impl<T: Real> PhaseEstimator<T> for VqiModel<T> {
    fn circuit(&self) -> &CircuitParams<T> {
        &self.circuit
    }

    fn estimate(&self, probabilities: &[T]) -> T {
        wrap_phase(self.mean_estimate(probabilities))
    }
}

/// Either kind of trained model, for code that handles both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case")]
pub enum AnyModel<T> {
    Hybrid(HybridModel<T>),
    Vqi(VqiModel<T>),
}

impl<T: Real> AnyModel<T> {
    pub fn as_hybrid(&self) -> Option<&HybridModel<T>> {
        match self {
            AnyModel::Hybrid(h) => Some(h),
            AnyModel::Vqi(_) => None,
        }
    }
}

impl<T: Real> PhaseEstimator<T> for AnyModel<T> {
    fn circuit(&self) -> &CircuitParams<T> {
        match self {
            AnyModel::Hybrid(m) => m.circuit(),
            AnyModel::Vqi(m) => m.circuit(),
        }
    }

    fn estimate(&self, probabilities: &[T]) -> T {
        match self {
            AnyModel::Hybrid(m) => m.estimate(probabilities),
            AnyModel::Vqi(m) => m.estimate(probabilities),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_estimator_differences() {
        let m = VqiModel { circuit: CircuitParams::<f64>::zeros(1, 1), slope: 0.37, offset: -0.2 };
        for (m1, m2) in [(2.0, -1.0), (0.5, 1.5), (-3.0, 3.0)] {
            let d = m.outcome_estimate(m1) - m.outcome_estimate(m2);
            assert!((d - 0.37 * (m1 - m2)).abs() < 1e-15);
        }
    }

    #[test]
    fn vqi_mean_estimate_uses_descending_labels() {
        // N = 2, labels (1, 0, -1); all weight on m = +1
        let m = VqiModel { circuit: CircuitParams::<f64>::zeros(1, 1), slope: 0.5, offset: 0.1 };
        assert!((m.mean_estimate(&[1.0, 0.0, 0.0]) - 0.6).abs() < 1e-15);
        assert!((m.mean_estimate(&[0.0, 0.0, 1.0]) + 0.4).abs() < 1e-15);
    }

    #[test]
    fn hybrid_rejects_wrong_input_width() {
        let d = Decoder::<f64>::zeros(vec![4, 3, 2], Activation::Tanh).unwrap();
        assert!(HybridModel::new(CircuitParams::zeros(1, 1), d, 4).is_err());
    }
}
