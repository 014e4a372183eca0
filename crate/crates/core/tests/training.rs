use globalphase::model::PhaseEstimator;
use globalphase::training::{
    bmse, fit_affine_estimator, init_circuit, init_decoder, train_decoder_fixed, train_joint, train_vqi_baseline,
};
use globalphase::{Activation, CircuitParams, EvalPoint, GaussianPrior, HybridModel, Interferometer, LayerAngles, TrainConfig};

fn small_config() -> TrainConfig {
    TrainConfig { n_phi: 32, max_iters: 120, min_iters: 40, patience: 20, eval_interval: 10, trace_points: 64, ..TrainConfig::default() }
}

fn model(n: usize, seed: u64) -> HybridModel {
    HybridModel::new(init_circuit(1, 1, 0.1, seed), init_decoder(n, &[12], Activation::Softsign, seed).unwrap(), n).unwrap()
}

#[test]
fn zero_learning_rate_leaves_parameters_unchanged() {
    let interf = Interferometer::for_particles(3).unwrap();
    let init = model(3, 4);
    let cfg = TrainConfig { learning_rate: 0.0, ..small_config() };
    let out = train_joint(&interf, &cfg, init.clone(), None).unwrap();
    assert_eq!(out.model, init);
    assert!(out.trace.losses.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn trace_contracts() {
    let interf = Interferometer::for_particles(4).unwrap();
    let cfg = small_config();
    let mut seen: Vec<usize> = Vec::new();
    let mut hook = |p: &EvalPoint, _: &HybridModel| {
        seen.push(p.epoch);
        Ok(())
    };
    let out = train_joint(&interf, &cfg, model(4, 9), Some(&mut hook)).unwrap();
    let t = &out.trace;
    assert_eq!(t.losses.len(), t.epochs_run);
    let min = t.losses.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(t.best_loss, min);
    assert_eq!(t.losses[t.best_epoch - 1], min);
    if t.stopped_early {
        assert!(t.epochs_run > cfg.min_iters);
    }
    let expected: Vec<usize> = (1..=t.epochs_run)
        .filter(|e| e % cfg.eval_interval == 0 || *e == t.epochs_run)
        .collect();
    assert_eq!(seen, expected);
    assert_eq!(t.evals.iter().map(|e| e.epoch).collect::<Vec<_>>(), expected);
    assert!(t.losses.last().unwrap() < &t.losses[0], "training reduces the loss");
    // best parameters reproduce the best loss
    let phases = globalphase::training::phase_grid::<f64>(cfg.n_phi).unwrap();
    let (loss, _) = globalphase::training::hybrid_loss_and_gradient(&interf, &out.model, &phases, true);
    assert!((loss - t.best_loss).abs() < 1e-12);
}

#[test]
fn early_stopping_waits_for_min_iters() {
    let interf = Interferometer::for_particles(2).unwrap();
    // a huge step makes the loss bounce, so patience runs out quickly
    let cfg = TrainConfig { learning_rate: 5.0, patience: 3, min_iters: 30, max_iters: 400, ..small_config() };
    let out = train_joint(&interf, &cfg, model(2, 1), None).unwrap();
    assert!(out.trace.stopped_early);
    assert!(out.trace.epochs_run > cfg.min_iters);
}

#[test]
fn training_is_deterministic() {
    let interf = Interferometer::for_particles(3).unwrap();
    let a = train_joint(&interf, &small_config(), model(3, 5), None).unwrap();
    let b = train_joint(&interf, &small_config(), model(3, 5), None).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn fixed_training_never_moves_the_circuit() {
    let interf = Interferometer::for_particles(3).unwrap();
    let circuit = init_circuit(1, 1, 0.8, 2);
    let out = train_decoder_fixed(&interf, &small_config(), &circuit, init_decoder(3, &[12], Activation::Tanh, 2).unwrap(), None).unwrap();
    assert_eq!(out.model.circuit, circuit);
    assert!(out.trace.best_loss < out.trace.losses[0]);
}

#[test]
fn non_finite_loss_is_reported() {
    let interf = Interferometer::for_particles(2).unwrap();
    let mut m = model(2, 1);
    m.decoder.params_mut()[0] = f64::NAN;
    assert!(matches!(train_joint(&interf, &small_config(), m, None), Err(globalphase::Error::NonFiniteLoss { epoch: 1, .. })));
}

/// An encoding that cancels the preparation leaves the probe in a J_z
/// eigenstate, so the phase only multiplies a global factor.
fn phase_blind_circuit() -> CircuitParams {
    let mut c = CircuitParams::zeros(1, 1);
    c.encoding[0] = LayerAngles { rot_y: -std::f64::consts::FRAC_PI_2, ..LayerAngles::zero() };
    c
}

#[test]
fn affine_fit_on_blind_circuit_returns_the_prior() {
    let interf = Interferometer::for_particles(4).unwrap();
    let prior = GaussianPrior::default();
    let circuit = phase_blind_circuit();
    assert!(interf.qfi(&circuit) < 1e-10);
    let est = fit_affine_estimator(&interf, &circuit, &prior).unwrap();
    assert!(est.slope.abs() < 1e-12);
    assert!((est.offset - prior.mean).abs() < 1e-12);
    assert!((bmse(&interf, &est, &prior).unwrap() - prior.std * prior.std).abs() < 1e-12);
}

#[test]
fn trained_baseline_beats_the_prior() {
    let interf = Interferometer::for_particles(4).unwrap();
    let prior = GaussianPrior::default();
    let cfg = TrainConfig { max_iters: 300, min_iters: 100, ..small_config() };
    let out = train_vqi_baseline(&interf, &cfg, &prior, init_circuit(1, 1, 0.1, 3), None).unwrap();
    let loss = bmse(&interf, &out.model, &prior).unwrap();
    assert!(loss < prior.std * prior.std, "bmse {loss}");
    assert!((loss - out.trace.best_loss).abs() < 1e-12);
    assert_eq!(out.model.circuit().len(), 10);
}

#[test]
fn invalid_configs_are_rejected() {
    let interf = Interferometer::for_particles(2).unwrap();
    for cfg in [
        TrainConfig { n_phi: 1, ..small_config() },
        TrainConfig { min_iters: 500, ..small_config() },
        TrainConfig { eval_interval: 0, ..small_config() },
        TrainConfig { learning_rate: -1.0, ..small_config() },
    ] {
        assert!(train_joint(&interf, &cfg, model(2, 1), None).is_err());
    }
}
