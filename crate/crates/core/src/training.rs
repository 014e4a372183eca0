//! Circular-loss training of the hybrid model, the BMSE-trained affine
//! baseline, and the frozen-circuit decoder control.
//!
//! All three trainers share one loop: full-batch loss over a fixed phase
//! grid, one Adam step per epoch, best-loss tracking with patience-based
//! early stopping, and an evaluation every `eval_interval` epochs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoder::{phase_estimate, Activation, Decoder};
use crate::error::{Error, Result};
use crate::interferometer::{CircuitParams, CompiledCircuit, Interferometer};
use crate::linalg::{CMatrix, HermitianEigen};
use crate::metrics::{error_table, EvalGrid};
use crate::model::{HybridModel, PhaseEstimator, VqiModel};
use crate::scalar::Real;

/// `n` points `-pi + 2 pi i / n`, `i = 0..n`.
pub fn phase_grid<T: Real>(n: usize) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::GridTooSmall { min: 2, actual: n });
    }
    let step = (T::PI() + T::PI()) / T::from_usize_lossy(n);
    Ok((0..n).map(|i| -T::PI() + step * T::from_usize_lossy(i)).collect())
}

/// `1 - mean(cos(truth - estimate))`.
pub fn circular_loss<T: Real>(truth: &[T], estimates: &[T]) -> Result<T> {
    if truth.len() != estimates.len() {
        return Err(Error::LengthMismatch(truth.len(), estimates.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = T::from_usize_lossy(truth.len());
    let mean_cos = truth.iter().zip(estimates).map(|(&a, &b)| (a - b).cos()).sum::<T>() / n;
    Ok(T::one() - mean_cos)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Training quadrature points.
    pub n_phi: usize,
    pub max_iters: usize,
    pub patience: usize,
    pub min_iters: usize,
    pub eval_interval: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Exact-probability grid used for the SWPE recorded at eval epochs.
    pub trace_points: usize,
    /// Half-width of the uniform circuit-angle initialization.
    pub circuit_init_width: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_phi: 100,
            max_iters: 2000,
            patience: 200,
            min_iters: 300,
            eval_interval: 10,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            trace_points: 512,
            circuit_init_width: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_phi < 2 {
            return fail("n_phi must be at least 2");
        }
        if self.patience < 1 {
            return fail("patience must be at least 1");
        }
        if self.min_iters >= self.max_iters {
            return fail("min_iters must be below max_iters");
        }
        if self.eval_interval < 1 {
            return fail("eval_interval must be at least 1");
        }
        if self.trace_points < 2 {
            return fail("trace_points must be at least 2");
        }
        if !(self.learning_rate >= 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("learning rate must be >= 0 and betas in [0, 1)");
        }
        Ok(())
    }
}

/// Gaussian prior on the phase for the BMSE baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianPrior {
    pub mean: f64,
    pub std: f64,
    /// Gauss-Hermite nodes; 7 keeps every node inside `mean +- 4 std`.
    pub nodes: usize,
}

impl Default for GaussianPrior {
    fn default() -> Self {
        Self { mean: 0.0, std: std::f64::consts::PI / 20.0, nodes: 7 }
    }
}

impl GaussianPrior {
    /// Phases and weights of the Gauss-Hermite rule for this prior.
    ///
    /// Golub-Welsch on the probabilists' Hermite recurrence: nodes are the
    /// eigenvalues of the Jacobi matrix with off-diagonal `sqrt(k)`, weights
    /// the squared first eigenvector components. Exact for polynomials up to
    /// degree `2 nodes - 1`.
    pub fn quadrature<T: Real>(&self) -> Result<(Vec<T>, Vec<T>)> {
        if !(self.std > 0.0) {
            return Err(Error::InvalidConfig("prior std must be positive".into()));
        }
        if self.nodes < 2 {
            return Err(Error::InvalidConfig("prior needs at least 2 nodes".into()));
        }
        let n = self.nodes;
        let jacobi = CMatrix::<T>::from_fn(n, |i, j| {
            if i + 1 == j || j + 1 == i {
                num_complex::Complex::new(T::from_usize_lossy(i.max(j)).sqrt(), T::zero())
            } else {
                num_complex::Complex::new(T::zero(), T::zero())
            }
        });
        let eig = HermitianEigen::new(&jacobi);
        let nodes = eig.values.iter().map(|&x| T::lit(self.mean) + T::lit(self.std) * x).collect();
        let weights = (0..n).map(|k| eig.vectors[(0, k)].norm_sqr()).collect();
        Ok((nodes, weights))
    }
}

/// Adam with bias correction over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Real> Adam<T> {
    pub fn new(n_params: usize, learning_rate: T, beta1: T, beta2: T, epsilon: T) -> Self {
        Self { learning_rate, beta1, beta2, epsilon, m: vec![T::zero(); n_params], v: vec![T::zero(); n_params], t: 0 }
    }

    pub fn from_config(n_params: usize, config: &TrainConfig) -> Self {
        Self::new(
            n_params,
            T::lit(config.learning_rate),
            T::lit(config.beta1),
            T::lit(config.beta2),
            T::lit(config.epsilon),
        )
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = T::one() - self.beta1.powi(self.t);
        let bc2 = T::one() - self.beta2.powi(self.t);
        for ((p, &g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = self.beta1 * *m + (T::one() - self.beta1) * g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Quantities recorded at an evaluation epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EvalPoint<T> {
    pub epoch: usize,
    pub qfi: T,
    pub swpe_median: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrainTrace<T> {
    /// Training loss of every completed epoch, evaluated before that
    /// epoch's update.
    pub losses: Vec<T>,
    pub evals: Vec<EvalPoint<T>>,
    pub best_loss: T,
    /// 1-based epoch whose pre-update parameters are returned.
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub stopped_early: bool,
}

impl<T: Real> TrainTrace<T> {
    /// Eval point with the largest QFI (earliest on ties).
    pub fn qfi_peak(&self) -> Option<&EvalPoint<T>> {
        self.evals.iter().fold(None, |best: Option<&EvalPoint<T>>, e| match best {
            Some(b) if b.qfi >= e.qfi => Some(b),
            _ => Some(e),
        })
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<M, T> {
    pub model: M,
    pub trace: TrainTrace<T>,
}

/// Hook invoked at every eval epoch with the current (not best) model.
pub type EvalHook<'a, M, T> = dyn FnMut(&EvalPoint<T>, &M) -> Result<()> + 'a;

/// Initial circuit angles: uniform in `[-width, width]` from `seed`.
pub fn init_circuit<T: Real>(layers_enc: usize, layers_dec: usize, width: f64, seed: u64) -> CircuitParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    CircuitParams::random(layers_enc, layers_dec, width, &mut rng)
}

/// Glorot-initialized decoder `[N+1, hidden..., 2]` from `seed`.
pub fn init_decoder<T: Real>(n_particles: usize, hidden: &[usize], activation: Activation, seed: u64) -> Result<Decoder<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let mut sizes = vec![n_particles + 1];
    sizes.extend_from_slice(hidden);
    sizes.push(2);
    Decoder::glorot(sizes, activation, &mut rng)
}

/// Circular loss of one distribution's decoding and its upstream gradient
/// `(dL/ds, dL/dc)`, both scaled by `weight`.
fn circular_term<T: Real>(phase: T, s: T, c: T, weight: T) -> (T, (T, T)) {
    let est = phase_estimate(s, c);
    let loss = weight * (T::one() - (phase - est).cos());
    let r2 = s * s + c * c;
    if r2 == T::zero() {
        return (loss, (T::zero(), T::zero()));
    }
    // dL/d est = -sin(phase - est); d est/ds = c/r2, d est/dc = -s/r2
    let g = -weight * (phase - est).sin();
    (loss, (g * c / r2, -g * s / r2))
}

/// Circular loss of a hybrid model over `phases` and its gradient in
/// [`HybridModel::to_flat`] order. The circuit part of the gradient is
/// left zero when `train_circuit` is false.
pub fn hybrid_loss_and_gradient<T: Real>(
    interferometer: &Interferometer<T>,
    model: &HybridModel<T>,
    phases: &[T],
    train_circuit: bool,
) -> (T, Vec<T>) {
    let compiled = interferometer.compile(&model.circuit);
    let mut grad = vec![T::zero(); model.n_params()];
    let loss = accumulate_hybrid(&compiled, &model.decoder, phases, train_circuit, &mut grad);
    (loss, grad)
}

fn accumulate_hybrid<T: Real>(
    compiled: &CompiledCircuit<T>,
    decoder: &Decoder<T>,
    phases: &[T],
    train_circuit: bool,
    grad: &mut [T],
) -> T {
    let weight = T::one() / T::from_usize_lossy(phases.len());
    let nc = compiled.n_params();
    let (g_circuit, g_decoder) = grad.split_at_mut(nc);
    let mut loss = T::zero();
    for &phi in phases {
        let jac = if train_circuit { Some(compiled.jacobian(phi)) } else { None };
        let probs = match &jac {
            Some(j) => j.probabilities.clone(),
            None => compiled.probabilities(phi).values,
        };
        let pass = decoder.forward(&probs).expect("decoder width matches circuit");
        let (s, c) = pass.output();
        let (l, upstream) = circular_term(phi, s, c, weight);
        loss += l;
        let g_in = decoder.backward_into(&pass, upstream, g_decoder);
        if let Some(j) = jac {
            for (gk, dp) in g_circuit.iter_mut().zip(&j.wrt_params) {
                *gk += g_in.iter().zip(dp).map(|(&a, &b)| a * b).sum::<T>();
            }
        }
    }
    loss
}

/// Shared epoch loop. `loss_grad` fills the gradient (pre-zeroed) and
/// returns the loss; `evaluate` is called with the current parameters at
/// eval epochs and once more after the last epoch if that one was not an
/// eval epoch.
fn optimize<T: Real>(
    config: &TrainConfig,
    mut params: Vec<T>,
    mut loss_grad: impl FnMut(&[T], &mut [T]) -> T,
    mut evaluate: impl FnMut(usize, &[T]) -> Result<EvalPoint<T>>,
) -> Result<(Vec<T>, TrainTrace<T>)> {
    config.validate()?;
    let mut adam = Adam::from_config(params.len(), config);
    let mut grad = vec![T::zero(); params.len()];
    let mut best = params.clone();
    let mut best_loss = T::infinity();
    let mut best_epoch = 0;
    let mut no_improve = 0;
    let mut losses = Vec::with_capacity(config.max_iters);
    let mut evals = Vec::new();
    let mut stopped_early = false;
    let mut epoch = 0;

    for t in 1..=config.max_iters {
        epoch = t;
        grad.iter_mut().for_each(|g| *g = T::zero());
        let loss = loss_grad(&params, &mut grad);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch: t, loss: loss.as_f64() });
        }
        losses.push(loss);
        if loss < best_loss {
            best_loss = loss;
            best.copy_from_slice(&params);
            best_epoch = t;
            no_improve = 0;
        } else {
            no_improve += 1;
        }
        adam.step(&mut params, &grad);
        if t % config.eval_interval == 0 {
            evals.push(evaluate(t, &params)?);
        }
        if t > config.min_iters && no_improve >= config.patience {
            stopped_early = true;
            break;
        }
    }
    if epoch % config.eval_interval != 0 {
        evals.push(evaluate(epoch, &params)?);
    }
    Ok((best, TrainTrace { losses, evals, best_loss, best_epoch, epochs_run: epoch, stopped_early }))
}

fn trace_grid<T: Real>(config: &TrainConfig) -> Result<EvalGrid<T>> {
    EvalGrid::uniform(config.trace_points, 0)
}

fn eval_point<T: Real, M: PhaseEstimator<T>>(
    interferometer: &Interferometer<T>,
    model: &M,
    grid: &EvalGrid<T>,
    epoch: usize,
) -> Result<EvalPoint<T>> {
    let qfi = interferometer.qfi(model.circuit());
    let swpe_median = error_table(interferometer, model, grid, 0)?.median_swpe();
    Ok(EvalPoint { epoch, qfi, swpe_median })
}

/// End-to-end optimization of circuit angles and decoder together.
pub fn train_joint<T: Real>(
    interferometer: &Interferometer<T>,
    config: &TrainConfig,
    init: HybridModel<T>,
    mut hook: Option<&mut EvalHook<'_, HybridModel<T>, T>>,
) -> Result<TrainOutcome<HybridModel<T>, T>> {
    let phases = phase_grid::<T>(config.n_phi)?;
    let grid = trace_grid(config)?;
    let mut scratch = init.clone();
    let mut eval_model = init.clone();
    let (best, trace) = optimize(
        config,
        init.to_flat(),
        |flat, grad| {
            scratch.set_flat(flat);
            let compiled = interferometer.compile(&scratch.circuit);
            accumulate_hybrid(&compiled, &scratch.decoder, &phases, true, grad)
        },
        |epoch, flat| {
            eval_model.set_flat(flat);
            let point = eval_point(interferometer, &eval_model, &grid, epoch)?;
            if let Some(h) = hook.as_mut() {
                h(&point, &eval_model)?;
            }
            Ok(point)
        },
    )?;
    let mut model = init;
    model.set_flat(&best);
    Ok(TrainOutcome { model, trace })
}

/// Decoder-only training on a frozen circuit.
pub fn train_decoder_fixed<T: Real>(
    interferometer: &Interferometer<T>,
    config: &TrainConfig,
    circuit: &CircuitParams<T>,
    decoder: Decoder<T>,
    mut hook: Option<&mut EvalHook<'_, HybridModel<T>, T>>,
) -> Result<TrainOutcome<HybridModel<T>, T>> {
    let phases = phase_grid::<T>(config.n_phi)?;
    let grid = trace_grid(config)?;
    let compiled = interferometer.compile(circuit);
    let inputs: Vec<Vec<T>> = phases.iter().map(|&p| compiled.probabilities(p).values).collect();
    let weight = T::one() / T::from_usize_lossy(phases.len());
    let mut scratch = decoder.clone();
    let mut eval_model = HybridModel::new(circuit.clone(), decoder.clone(), interferometer.n_particles())?;
    let (best, trace) = optimize(
        config,
        decoder.params().to_vec(),
        |flat, grad| {
            scratch.params_mut().copy_from_slice(flat);
            let mut loss = T::zero();
            for (&phi, p) in phases.iter().zip(&inputs) {
                let pass = scratch.forward(p).expect("decoder width matches circuit");
                let (s, c) = pass.output();
                let (l, upstream) = circular_term(phi, s, c, weight);
                loss += l;
                scratch.backward_into(&pass, upstream, grad);
            }
            loss
        },
        |epoch, flat| {
            eval_model.decoder.params_mut().copy_from_slice(flat);
            let point = eval_point(interferometer, &eval_model, &grid, epoch)?;
            if let Some(h) = hook.as_mut() {
                h(&point, &eval_model)?;
            }
            Ok(point)
        },
    )?;
    let mut decoder = decoder;
    decoder.params_mut().copy_from_slice(&best);
    let model = HybridModel::new(circuit.clone(), decoder, interferometer.n_particles())?;
    Ok(TrainOutcome { model, trace })
}

/// Prior-weighted mean squared error of the affine baseline.
pub fn bmse<T: Real>(interferometer: &Interferometer<T>, model: &VqiModel<T>, prior: &GaussianPrior) -> Result<T> {
    let (nodes, weights) = prior.quadrature::<T>()?;
    let compiled = interferometer.compile(&model.circuit);
    let labels = interferometer.operators().space().labels();
    Ok(nodes
        .iter()
        .zip(&weights)
        .map(|(&phi, &w)| {
            let p = compiled.probabilities(phi).values;
            w * p.iter().zip(labels).map(|(&pm, &m)| pm * (model.outcome_estimate(m) - phi).powi(2)).sum::<T>()
        })
        .sum())
}

/// Closed-form BMSE-optimal slope and offset for a fixed circuit
/// (weighted least squares of phase on `m`).
pub fn fit_affine_estimator<T: Real>(
    interferometer: &Interferometer<T>,
    circuit: &CircuitParams<T>,
    prior: &GaussianPrior,
) -> Result<VqiModel<T>> {
    let (nodes, weights) = prior.quadrature::<T>()?;
    let compiled = interferometer.compile(circuit);
    let labels = interferometer.operators().space().labels();
    let (mut em, mut ephi, mut emm, mut emphi) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (&phi, &w) in nodes.iter().zip(&weights) {
        for (&pm, &m) in compiled.probabilities(phi).values.iter().zip(labels) {
            let q = w * pm;
            em += q * m;
            ephi += q * phi;
            emm += q * m * m;
            emphi += q * m * phi;
        }
    }
    let var_m = emm - em * em;
    let cov = emphi - em * ephi;
    let slope = if var_m > T::lit(1e-12) { cov / var_m } else { T::zero() };
    Ok(VqiModel { circuit: circuit.clone(), slope, offset: ephi - slope * em })
}

/// BMSE minimization of circuit angles and affine estimator together,
/// starting from the least-squares estimator for `circuit`.
pub fn train_vqi_baseline<T: Real>(
    interferometer: &Interferometer<T>,
    config: &TrainConfig,
    prior: &GaussianPrior,
    circuit: CircuitParams<T>,
    mut hook: Option<&mut EvalHook<'_, VqiModel<T>, T>>,
) -> Result<TrainOutcome<VqiModel<T>, T>> {
    let (nodes, weights) = prior.quadrature::<T>()?;
    let init = fit_affine_estimator(interferometer, &circuit, prior)?;
    let grid = trace_grid(config)?;
    let labels = interferometer.operators().space().labels().to_vec();
    let mut scratch = init.clone();
    let mut eval_model = init.clone();
    let (best, trace) = optimize(
        config,
        init.to_flat(),
        |flat, grad| {
            scratch.set_flat(flat);
            let compiled = interferometer.compile(&scratch.circuit);
            let nc = compiled.n_params();
            let mut loss = T::zero();
            for (&phi, &w) in nodes.iter().zip(&weights) {
                let jac = compiled.jacobian(phi);
                let mut dl_dp = Vec::with_capacity(labels.len());
                for (&p, &m) in jac.probabilities.iter().zip(&labels) {
                    let e = scratch.outcome_estimate(m) - phi;
                    loss += w * p * e * e;
                    dl_dp.push(w * e * e);
                    grad[nc] += w * p * (e + e) * m;
                    grad[nc + 1] += w * p * (e + e);
                }
                for (gk, dp) in grad[..nc].iter_mut().zip(&jac.wrt_params) {
                    *gk += dl_dp.iter().zip(dp).map(|(&a, &b)| a * b).sum::<T>();
                }
            }
            loss
        },
        |epoch, flat| {
            eval_model.set_flat(flat);
            let point = eval_point(interferometer, &eval_model, &grid, epoch)?;
            if let Some(h) = hook.as_mut() {
                h(&point, &eval_model)?;
            }
            Ok(point)
        },
    )?;
    let mut model = init;
    model.set_flat(&best);
    Ok(TrainOutcome { model, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circular_loss_examples() {
        let t = [0.3, -1.2, 2.8];
        assert_eq!(circular_loss(&t, &t).unwrap(), 0.0);
        let shifted: Vec<f64> = t.iter().map(|x| x + PI).collect();
        assert!((circular_loss(&t, &shifted).unwrap() - 2.0).abs() < 1e-15);
        assert!((circular_loss(&[0.0], &[PI / 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(circular_loss::<f64>(&[], &[]), Err(Error::EmptyInput)));
        assert!(circular_loss(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn phase_grid_examples() {
        let g = phase_grid::<f64>(4).unwrap();
        assert_eq!(g, vec![-PI, -PI / 2.0, 0.0, PI / 2.0]);
        let g = phase_grid::<f64>(100).unwrap();
        assert!(g.iter().all(|&p| (-PI..PI).contains(&p)));
        let (s, c) = g.iter().fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
        assert!(s.abs() / 100.0 < 1e-12 && c.abs() / 100.0 < 1e-12);
        assert!(phase_grid::<f64>(1).is_err());
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut adam = Adam::new(3, 0.1, 0.9, 0.999, 1e-8);
        let mut p = vec![1.0, -2.0, 0.5];
        for _ in 0..5 {
            adam.step(&mut p, &[0.0, 0.0, 0.0]);
        }
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn adam_first_step_has_magnitude_lr() {
        let mut adam = Adam::new(3, 0.01, 0.9, 0.999, 1e-8);
        let mut p = vec![0.0_f64; 3];
        adam.step(&mut p, &[3.0, -0.2, 1e-3]);
        assert!((p[0] + 0.01).abs() < 1e-9);
        assert!((p[1] - 0.01).abs() < 1e-9);
        assert!((p[2] + 0.01).abs() < 1e-7);
    }

    #[test]
    fn adam_constant_gradient_drifts_monotonically() {
        // m_hat = g and v_hat = g^2 exactly under a constant gradient, so
        // every step is -lr * g / (|g| + eps).
        let mut adam = Adam::new(1, 0.05, 0.9, 0.999, 1e-8);
        let mut p = vec![1.0];
        let mut prev = p[0];
        for k in 1..=50 {
            adam.step(&mut p, &[0.7]);
            assert!(p[0] < prev);
            let expected = 1.0 - k as f64 * 0.05 * 0.7 / (0.7 + 1e-8);
            assert!((p[0] - expected).abs() < 1e-12);
            prev = p[0];
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { n_phi: 1, ..Default::default() },
            TrainConfig { patience: 0, ..Default::default() },
            TrainConfig { min_iters: 2000, ..Default::default() },
            TrainConfig { eval_interval: 0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn gauss_hermite_moments() {
        let prior = GaussianPrior { mean: 0.3, std: 0.2, nodes: 7 };
        let (x, w) = prior.quadrature::<f64>().unwrap();
        let m0: f64 = w.iter().sum();
        let m1: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let m2: f64 = x.iter().zip(&w).map(|(a, b)| (a - 0.3).powi(2) * b).sum();
        let m4: f64 = x.iter().zip(&w).map(|(a, b)| (a - 0.3).powi(4) * b).sum();
        assert!((m0 - 1.0).abs() < 1e-13);
        assert!((m1 - 0.3).abs() < 1e-13);
        assert!((m2 - 0.04).abs() < 1e-13);
        assert!((m4 - 3.0 * 0.04 * 0.04).abs() < 1e-13);
        assert!(x.iter().all(|&v| (v - 0.3).abs() <= 4.0 * 0.2));
    }
}
