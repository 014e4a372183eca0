//! Wrapped phase error, SWPE in dB, decoding-Jacobian statistics and
//! multi-run percentile summaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::Interferometer;
use crate::model::PhaseEstimator;
use crate::scalar::Real;
use crate::training::phase_grid;

/// SWPE assigned to an exactly zero error, in dB.
pub const DEFAULT_SWPE_FLOOR_DB: f64 = -160.0;

/// Smallest grid accepted by [`decoding_jacobian`].
pub const MIN_JACOBIAN_GRID: usize = 16;

/// Principal value of an angle in `[-pi, pi)`.
pub fn wrap_phase<T: Real>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let r = x - two_pi * ((x + T::PI()) / two_pi).floor();
    // floor rounding can land exactly on +pi
    if r >= T::PI() {
        r - two_pi
    } else if r < -T::PI() {
        r + two_pi
    } else {
        r
    }
}

/// `Arg(e^{i(estimate - truth)})` in `[-pi, pi)`.
pub fn wrapped_error<T: Real>(truth: T, estimate: T) -> T {
    wrap_phase(estimate - truth)
}

pub fn swpe_db<T: Real>(delta: T) -> T {
    swpe_db_with_floor(delta, T::lit(DEFAULT_SWPE_FLOOR_DB))
}

/// `10 log10(delta^2)`, clamped below at `floor_db`.
pub fn swpe_db_with_floor<T: Real>(delta: T, floor_db: T) -> T {
    if delta == T::zero() {
        return floor_db;
    }
    (T::lit(10.0) * (delta * delta).log10()).max(floor_db)
}

/// Uniform, endpoint-exclusive phase grid with a shot budget (0 = exact).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EvalGrid<T> {
    pub phases: Vec<T>,
    pub shots: u64,
}

impl<T: Real> EvalGrid<T> {
    pub fn uniform(points: usize, shots: u64) -> Result<Self> {
        Ok(Self { phases: phase_grid(points)?, shots })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Phase estimates over a grid.
///
/// With `shots > 0` each phase gets its own multinomial draw from the
/// stream `(seed, phase index)`, so results do not depend on evaluation
/// order.
pub fn estimates<T: Real, M: PhaseEstimator<T> + ?Sized>(
    interferometer: &Interferometer<T>,
    model: &M,
    grid: &EvalGrid<T>,
    seed: u64,
) -> Result<Vec<T>> {
    let compiled = interferometer.compile(model.circuit());
    grid.phases
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let exact = compiled.probabilities(phi);
            let p = if grid.shots > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                exact.sample_with(grid.shots, &mut rng)?
            } else {
                exact
            };
            Ok(model.estimate(&p.values))
        })
        .collect()
}

/// Per-phase errors and SWPE for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ErrorTable<T> {
    pub phases: Vec<T>,
    pub estimates: Vec<T>,
    pub errors: Vec<T>,
    pub swpe_db: Vec<T>,
}

impl<T: Real> ErrorTable<T> {
    pub fn from_estimates(phases: &[T], estimates: Vec<T>) -> Self {
        let errors: Vec<T> = phases.iter().zip(&estimates).map(|(&p, &e)| wrapped_error(p, e)).collect();
        let swpe = errors.iter().map(|&d| swpe_db(d)).collect();
        Self { phases: phases.to_vec(), estimates, errors, swpe_db: swpe }
    }

    pub fn median_swpe(&self) -> T {
        median(&self.swpe_db)
    }
}

pub fn error_table<T: Real, M: PhaseEstimator<T> + ?Sized>(
    interferometer: &Interferometer<T>,
    model: &M,
    grid: &EvalGrid<T>,
    seed: u64,
) -> Result<ErrorTable<T>> {
    Ok(ErrorTable::from_estimates(&grid.phases, estimates(interferometer, model, grid, seed)?))
}

/// Mean and variance of `J(phi) = d phi_est / d phi` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct JacobianStats<T> {
    pub mean: T,
    pub variance: T,
    pub trace: Vec<T>,
}

impl<T: Real> JacobianStats<T> {
    /// Fraction of grid points with `J > 0`.
    pub fn positive_fraction(&self) -> T {
        let pos = self.trace.iter().filter(|&&j| j > T::zero()).count();
        T::from_usize_lossy(pos) / T::from_usize_lossy(self.trace.len())
    }
}

/// Central differences on a periodic uniform grid, wrapping both the
/// estimate difference and the phase step.
pub fn decoding_jacobian<T: Real>(phases: &[T], estimates: &[T]) -> Result<JacobianStats<T>> {
    let n = phases.len();
    if n < MIN_JACOBIAN_GRID {
        return Err(Error::GridTooSmall { min: MIN_JACOBIAN_GRID, actual: n });
    }
    if estimates.len() != n {
        return Err(Error::LengthMismatch(n, estimates.len()));
    }
    let trace: Vec<T> = (0..n)
        .map(|i| {
            let (next, prev) = ((i + 1) % n, (i + n - 1) % n);
            wrap_phase(estimates[next] - estimates[prev]) / wrap_phase(phases[next] - phases[prev])
        })
        .collect();
    let count = T::from_usize_lossy(n);
    let mean = trace.iter().copied().sum::<T>() / count;
    let variance = trace.iter().map(|&j| (j - mean) * (j - mean)).sum::<T>() / count;
    Ok(JacobianStats { mean, variance, trace })
}

/// Jacobian statistics of a model on exact probabilities.
pub fn model_jacobian<T: Real, M: PhaseEstimator<T> + ?Sized>(
    interferometer: &Interferometer<T>,
    model: &M,
    points: usize,
) -> Result<JacobianStats<T>> {
    let grid = EvalGrid::uniform(points, 0)?;
    let est = estimates(interferometer, model, &grid, 0)?;
    decoding_jacobian(&grid.phases, &est)
}

/// Linear interpolation between order statistics of sorted data
/// (`q` in `[0, 1]`).
pub fn percentile_sorted<T: Real>(sorted: &[T], q: T) -> T {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let pos = q * T::from_usize_lossy(sorted.len() - 1);
    let lo = pos.floor();
    let frac = pos - lo;
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (sorted[j] - sorted[i]) * frac
}

fn sorted_copy<T: Real>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in metrics"));
    v
}

pub fn median<T: Real>(values: &[T]) -> T {
    percentile_sorted(&sorted_copy(values), T::lit(0.5))
}

/// Distribution summary of one quantity across runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Summary<T> {
    pub median: T,
    pub q25: T,
    pub q75: T,
    pub mean: T,
    pub p5: T,
    pub p95: T,
}

impl<T: Real> Summary<T> {
    pub fn of(values: &[T]) -> Self {
        let s = sorted_copy(values);
        let p = |q: f64| percentile_sorted(&s, T::lit(q));
        Self {
            median: p(0.5),
            q25: p(0.25),
            q75: p(0.75),
            mean: s.iter().copied().sum::<T>() / T::from_usize_lossy(s.len()),
            p5: p(0.05),
            p95: p(0.95),
        }
    }

    pub fn iqr(&self) -> T {
        self.q75 - self.q25
    }
}

/// Per-phase summaries; `per_run[r][i]` is run `r`'s value at phase `i`.
pub fn aggregate_runs<T: Real>(per_run: &[Vec<T>]) -> Vec<Summary<T>> {
    let Some(first) = per_run.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| Summary::of(&per_run.iter().map(|run| run[i]).collect::<Vec<_>>()))
        .collect()
}

/// SWPE of each run's model over `grid`, summarized per phase. Run `r`
/// samples with seed `base_seed + r`.
pub fn evaluate_swpe<T: Real, M: PhaseEstimator<T>>(
    interferometer: &Interferometer<T>,
    models: &[M],
    grid: &EvalGrid<T>,
    base_seed: u64,
) -> Result<Vec<Summary<T>>> {
    let per_run = models
        .iter()
        .enumerate()
        .map(|(r, m)| Ok(error_table(interferometer, m, grid, base_seed + r as u64)?.swpe_db))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate_runs(&per_run))
}
