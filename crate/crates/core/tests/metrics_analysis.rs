use std::f64::consts::PI;

use globalphase::analysis::{feature_heatmap, latent_matrix, pca_2d, snapshot, FeatureKind};
use globalphase::metrics::{aggregate_runs, decoding_jacobian, median, percentile_sorted, swpe_db_with_floor, Summary};
use globalphase::training::{init_circuit, init_decoder, phase_grid};
use globalphase::{swpe_db, wrap_phase, wrapped_error, Activation, EvalGrid, FeatureMatrix, HybridModel, Interferometer, Snapshot};
use proptest::prelude::*;

#[test]
fn swpe_examples() {
    assert!((swpe_db(0.1_f64) + 20.0).abs() < 1e-12);
    let d = wrapped_error(PI - 0.1, -PI + 0.1);
    assert!((d - 0.2).abs() < 1e-12, "short way round: {d}");
    assert!((wrapped_error(PI, -PI)).abs() < 1e-12);
    assert_eq!(wrapped_error(0.0, PI), -PI);
    assert_eq!(wrapped_error(0.4, 0.4), 0.0);
    assert_eq!(wrap_phase(PI), -PI);
    assert_eq!(wrap_phase(-PI), -PI);
    assert_eq!(swpe_db(0.0), globalphase::metrics::DEFAULT_SWPE_FLOOR_DB);
    assert_eq!(swpe_db_with_floor(0.0, -50.0), -50.0);
}

proptest! {
    #[test]
    fn wrap_lands_in_half_open_interval(x in -1e3f64..1e3) {
        let w = wrap_phase(x);
        prop_assert!((-PI..PI).contains(&w));
        prop_assert!(((x - w) / (2.0 * PI) - ((x - w) / (2.0 * PI)).round()).abs() < 1e-9);
    }

    #[test]
    fn wrapped_error_is_antisymmetric_and_periodic(a in -PI..PI, b in -PI..PI, k in -5i32..5) {
        let d = wrapped_error(a, b);
        prop_assert!(d.abs() <= PI + 1e-12);
        let back = wrapped_error(b, a);
        prop_assert!((d + back).abs() < 1e-9 || (d.abs() - PI).abs() < 1e-9);
        prop_assert!((wrapped_error(a, b + 2.0 * PI * k as f64) - d).abs() < 1e-9);
    }

    #[test]
    fn percentiles_are_ordered(mut v in prop::collection::vec(-100.0f64..100.0, 1..50)) {
        let s = Summary::of(&v);
        prop_assert!(s.p5 <= s.q25 && s.q25 <= s.median && s.median <= s.q75 && s.q75 <= s.p95);
        v.sort_by(f64::total_cmp);
        prop_assert_eq!(percentile_sorted(&v, 0.0), v[0]);
        prop_assert_eq!(percentile_sorted(&v, 1.0), v[v.len() - 1]);
    }

    #[test]
    fn pca_is_equivariant_under_row_permutation(seed in any::<u64>(), rot in 1usize..20) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let phases = phase_grid(20).unwrap();
        let m = FeatureMatrix { kind: FeatureKind::Latent, phases: phases.clone(), rows: rows.clone() };
        let mut prow = rows.clone();
        prow.rotate_left(rot);
        let mut pph = phases.clone();
        pph.rotate_left(rot);
        let p = pca_2d(&m).unwrap();
        let q = pca_2d(&FeatureMatrix { kind: FeatureKind::Latent, phases: pph, rows: prow }).unwrap();
        prop_assert!(p.explained.0 >= p.explained.1 && p.explained.1 >= 0.0);
        prop_assert!((p.explained.0 - q.explained.0).abs() < 1e-9);
        for i in 0..20 {
            let (a, b) = (p.points[(i + rot) % 20], q.points[i]);
            prop_assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8);
        }
    }
}

#[test]
fn summary_percentiles_interpolate() {
    let s = Summary::of(&[4.0_f64, 1.0, 3.0, 2.0, 5.0]);
    assert_eq!((s.median, s.q25, s.q75, s.mean), (3.0, 2.0, 4.0, 3.0));
    assert!((s.p5 - 1.2).abs() < 1e-12 && (s.p95 - 4.8).abs() < 1e-12);
    assert_eq!(median(&[1.0, 2.0]), 1.5);
    let agg = aggregate_runs(&[vec![1.0, 10.0], vec![3.0, 30.0]]);
    assert_eq!(agg[0].median, 2.0);
    assert_eq!(agg[1].median, 20.0);
}

#[test]
fn identity_estimator_has_unit_jacobian_across_the_seam() {
    let phases = phase_grid::<f64>(64).unwrap();
    let j = decoding_jacobian(&phases, &phases).unwrap();
    assert!((j.mean - 1.0).abs() < 1e-12 && j.variance < 1e-20);
    assert_eq!(j.positive_fraction(), 1.0);
    let reversed: Vec<f64> = phases.iter().map(|&p| wrap_phase(-p)).collect();
    assert!((decoding_jacobian(&phases, &reversed).unwrap().mean + 1.0).abs() < 1e-12);
    assert!(decoding_jacobian(&phases[..8], &phases[..8]).is_err());
}

#[test]
fn heatmap_ignores_the_decoder_and_snapshots_round_trip() {
    let interf = Interferometer::for_particles(4).unwrap();
    let circuit = init_circuit(1, 1, 0.7, 1);
    let grid = EvalGrid::uniform(32, 0).unwrap();
    let a = HybridModel::new(circuit.clone(), init_decoder(4, &[6], Activation::Tanh, 1).unwrap(), 4).unwrap();
    let b = HybridModel::new(circuit.clone(), init_decoder(4, &[9, 3], Activation::Elu, 2).unwrap(), 4).unwrap();
    assert_eq!(feature_heatmap(&interf, &a.circuit, &grid), feature_heatmap(&interf, &b.circuit, &grid));
    assert_eq!(latent_matrix(&interf, &b, &grid).n_cols(), 3);
    let snap = snapshot(&interf, &a, &grid, 40, 3.5, -20.0).unwrap();
    let text = serde_json::to_string(&snap).unwrap();
    let back: Snapshot = serde_json::from_str(&text).unwrap();
    assert_eq!(back, snap);
}
