//! Representation geometry: probability heatmaps, decoder latent features,
//! and their 2D PCA projections.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{CircuitParams, Interferometer};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::metrics::EvalGrid;
use crate::model::HybridModel;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    /// Columns are outcome probabilities `p(m|phi)`.
    Quantum,
    /// Columns are penultimate-layer decoder activations.
    Latent,
}

/// One row per grid phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeatureMatrix<T> {
    pub kind: FeatureKind,
    pub phases: Vec<T>,
    pub rows: Vec<Vec<T>>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Smallest L1 distance between rows whose phases are more than
    /// `min_gap` apart on the circle.
    pub fn min_distant_l1(&self, min_gap: T) -> T {
        let mut best = T::infinity();
        for i in 0..self.rows.len() {
            for j in (i + 1)..self.rows.len() {
                let gap = crate::metrics::wrap_phase(self.phases[j] - self.phases[i]).abs();
                if gap > min_gap {
                    let d = self.rows[i].iter().zip(&self.rows[j]).map(|(a, b)| (*a - *b).abs()).sum::<T>();
                    best = best.min(d);
                }
            }
        }
        best
    }
}

/// Exact `p(m|phi)` for every grid phase. Depends on the circuit only.
pub fn feature_heatmap<T: Real>(
    interferometer: &Interferometer<T>,
    circuit: &CircuitParams<T>,
    grid: &EvalGrid<T>,
) -> FeatureMatrix<T> {
    let compiled = interferometer.compile(circuit);
    FeatureMatrix {
        kind: FeatureKind::Quantum,
        phases: grid.phases.clone(),
        rows: grid.phases.iter().map(|&p| compiled.probabilities(p).values).collect(),
    }
}

/// Penultimate-layer activations of the decoder for every grid phase.
pub fn latent_matrix<T: Real>(
    interferometer: &Interferometer<T>,
    model: &HybridModel<T>,
    grid: &EvalGrid<T>,
) -> FeatureMatrix<T> {
    let compiled = interferometer.compile(&model.circuit);
    FeatureMatrix {
        kind: FeatureKind::Latent,
        phases: grid.phases.clone(),
        rows: grid.phases.iter().map(|&p| model.latent(&compiled.probabilities(p).values)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Projection2D<T> {
    pub phases: Vec<T>,
    pub points: Vec<(T, T)>,
    /// Fractions of total variance carried by the two components.
    pub explained: (T, T),
}

impl<T: Real> Projection2D<T> {
    /// Largest pairwise distance between projected points.
    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
            }
        }
        d
    }

    /// Distance between the first and last projected points relative to the
    /// diameter; small values mean the curve closes on itself.
    pub fn closure_gap(&self) -> T {
        let (a, b) = (self.points[0], self.points[self.points.len() - 1]);
        let gap = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        let d = self.diameter();
        if d > T::zero() {
            gap / d
        } else {
            T::zero()
        }
    }
}

/// Projection onto the top two principal axes of the sample covariance.
///
/// Each axis is signed so that its largest-magnitude loading is positive.
/// Rank-1 input yields an all-zero second component with zero explained
/// variance.
pub fn pca_2d<T: Real>(matrix: &FeatureMatrix<T>) -> Result<Projection2D<T>> {
    let n = matrix.n_rows();
    if n < 3 {
        return Err(Error::TooFewRows(n));
    }
    let d = matrix.n_cols();
    let count = T::from_usize_lossy(n);
    let means: Vec<T> = (0..d).map(|j| matrix.rows.iter().map(|r| r[j]).sum::<T>() / count).collect();
    let centered: Vec<Vec<T>> = matrix.rows.iter().map(|r| r.iter().zip(&means).map(|(&x, &m)| x - m).collect()).collect();
    let denom = T::from_usize_lossy(n - 1);
    let cov = CMatrix::from_fn(d, |a, b| {
        Complex::new(centered.iter().map(|r| r[a] * r[b]).sum::<T>() / denom, T::zero())
    });
    let eig = HermitianEigen::new(&cov);
    let total: T = eig.values.iter().map(|&l| l.max(T::zero())).sum();
    let axis = |rank: usize| -> (Vec<T>, T) {
        if rank >= d {
            return (vec![T::zero(); d], T::zero());
        }
        let k = d - 1 - rank;
        let lambda = eig.values[k].max(T::zero());
        let mut v: Vec<T> = (0..d).map(|i| eig.vectors[(i, k)].re).collect();
        let lead = v.iter().copied().fold(T::zero(), |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if lead < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let frac = if total > T::zero() { lambda / total } else { T::zero() };
        // numerically null directions carry no signal
        if total <= T::zero() || frac < T::lit(1e-12) {
            (vec![T::zero(); d], T::zero())
        } else {
            (v, frac)
        }
    };
    let (v1, e1) = axis(0);
    let (v2, e2) = axis(1);
    let dot = |r: &[T], v: &[T]| r.iter().zip(v).map(|(&a, &b)| a * b).sum::<T>();
    Ok(Projection2D {
        phases: matrix.phases.clone(),
        points: centered.iter().map(|r| (dot(r, &v1), dot(r, &v2))).collect(),
        explained: (e1, e2),
    })
}

/// Everything recorded about a model at one eval epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Snapshot<T> {
    pub epoch: usize,
    pub qfi: T,
    pub swpe_median: T,
    pub heatmap: FeatureMatrix<T>,
    pub latent_projection: Projection2D<T>,
}

pub fn snapshot<T: Real>(
    interferometer: &Interferometer<T>,
    model: &HybridModel<T>,
    grid: &EvalGrid<T>,
    epoch: usize,
    qfi: T,
    swpe_median: T,
) -> Result<Snapshot<T>> {
    Ok(Snapshot {
        epoch,
        qfi,
        swpe_median,
        heatmap: feature_heatmap(interferometer, &model.circuit, grid),
        latent_projection: pca_2d(&latent_matrix(interferometer, model, grid))?,
    })
}
