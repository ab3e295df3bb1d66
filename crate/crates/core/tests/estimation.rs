mod support;

use irsloc_core::channel::sample_received_signal;
use irsloc_core::estimation::{grid_search_mle, neg_log_likelihood};
use irsloc_core::{GridSpec, PhaseProfile, Position3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_grid(center: Position3, half: f64, step: f64) -> GridSpec {
    GridSpec {
        center,
        half_extent_m: half,
        step_m: step,
        plane_z: center.z,
    }
}

#[test]
fn likelihood_vanishes_at_the_truth_for_the_noiseless_mean() {
    let scene = support::scene(48, 48);
    let radio = support::radio(35.0);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let phases = PhaseProfile::random(48, &mut rng);
    let signal = sample_received_signal(&scene, &radio, &phases, &mut rng).unwrap();
    let l = neg_log_likelihood(&signal.mean, scene.ue_true, &scene, &radio, &phases).unwrap();
    assert_eq!(l, 0.0);
}

#[test]
fn likelihood_matches_a_direct_residual_sum() {
    let scene = support::scene(12, 10);
    let radio = support::radio(30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let amp = (radio.rician_kappa * radio.tx_power_mw / (1.0 + radio.rician_kappa)).sqrt();
    for _ in 0..30 {
        let phases = PhaseProfile::random(10, &mut rng);
        let y = sample_received_signal(&scene, &radio, &phases, &mut rng).unwrap().y;
        let candidate = scene.ue_true + Position3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), 0.0);
        let ours = neg_log_likelihood(&y, candidate, &scene, &radio, &phases).unwrap();
        assert!(ours >= 0.0);
        let h = support::brute_force_channel(&scene, &radio, candidate, &phases);
        let oracle: f64 = y
            .iter()
            .zip(&h)
            .map(|(yb, hb)| (yb - hb * amp).norm_sqr())
            .sum::<f64>()
            / radio.noise_power_mw;
        assert!((ours / oracle - 1.0).abs() < 1e-8, "{ours} vs {oracle}");
    }
}

#[test]
fn fast_grid_search_equals_naive_evaluation() {
    let scene = support::scene(48, 48);
    let radio = support::radio(25.0);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let phases = PhaseProfile::random(48, &mut rng);
    let y = sample_received_signal(&scene, &radio, &phases, &mut rng).unwrap().y;
    let grid = small_grid(scene.ue_true, 0.02, 0.002);
    assert_eq!(grid.points_per_axis(), 21);
    let field = grid_search_mle(&y, &grid, &scene, &radio, &phases).unwrap();

    let mut best = (f64::INFINITY, Position3::ORIGIN);
    for iy in 0..21 {
        for ix in 0..21 {
            let p = grid.point(ix, iy);
            let l = neg_log_likelihood(&y, p, &scene, &radio, &phases).unwrap();
            assert_eq!(l.to_bits(), field.values[iy * 21 + ix].to_bits());
            if l < best.0 {
                best = (l, p);
            }
        }
    }
    assert_eq!(field.estimate, best.1);
    assert!(field.values.iter().all(|&v| v >= field.min_value()));
}

#[test]
fn noiseless_on_grid_truth_is_recovered_exactly() {
    let base = support::scene(48, 48);
    let radio = support::radio(35.0).noiseless();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let grid = small_grid(base.ue_true, 0.04, 0.002);
    for _ in 0..3 {
        let truth = grid.point(rng.random_range(0..41), rng.random_range(0..41));
        let scene = irsloc_core::SceneGeometry {
            ue_true: truth,
            ..base.clone()
        };
        let phases = PhaseProfile::random(48, &mut rng);
        let y = sample_received_signal(&scene, &radio, &phases, &mut rng).unwrap().y;
        let field = grid_search_mle(&y, &grid, &scene, &radio, &phases).unwrap();
        assert_eq!(field.estimate, truth);
        assert_eq!(field.min_value(), 0.0);
    }
}

#[test]
fn likelihood_oscillates_along_a_slice() {
    let scene = support::scene(48, 48);
    let radio = support::radio(35.0);
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let phases = PhaseProfile::random(48, &mut rng);
    let y = sample_received_signal(&scene, &radio.noiseless(), &phases, &mut rng).unwrap().y;
    let values: Vec<f64> = (-50..=50)
        .map(|k| {
            let p = scene.ue_true + Position3::new(k as f64 * 1e-3, 0.0, 0.0);
            neg_log_likelihood(&y, p, &scene, &radio, &phases).unwrap()
        })
        .collect();
    let local_minima = values.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count();
    assert!(local_minima >= 2, "found {local_minima} local minima");
}

#[test]
fn refining_the_grid_never_raises_the_minimum() {
    let scene = support::scene(48, 48);
    let radio = support::radio(20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..3 {
        let phases = PhaseProfile::random(48, &mut rng);
        let y = sample_received_signal(&scene, &radio, &phases, &mut rng).unwrap().y;
        let coarse = grid_search_mle(&y, &small_grid(scene.ue_true, 0.04, 0.004), &scene, &radio, &phases).unwrap();
        let fine = grid_search_mle(&y, &small_grid(scene.ue_true, 0.04, 0.002), &scene, &radio, &phases).unwrap();
        assert!(fine.min_value() <= coarse.min_value() * (1.0 + 1e-9));
    }
}
