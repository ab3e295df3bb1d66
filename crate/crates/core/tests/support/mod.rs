//! Scenario builders and independent oracles shared by the integration tests.
//!
//! Nothing here calls the code paths it is used to check: channel sums use
//! `exp` of the total path length, the projection oracle solves the KKT system
//! by bisection and the phase oracle minimizes the spread objective by
//! coordinate descent.

#![allow(dead_code)]

use irsloc_core::geometry::{distance_matrix_irs_bs, distance_vector_ue_irs};
use irsloc_core::{ArrayLayout, Complex, PhaseProfile, Position3, RadioConfig, SceneGeometry};
use rand::Rng;

pub const CARRIER_HZ: f64 = 28.0e9;

pub fn radio(tx_power_dbm: f64) -> RadioConfig {
    RadioConfig::from_dbm(CARRIER_HZ, tx_power_dbm, 5.0, -125.0)
}

/// The reference scenario: BS at [12,0,2], UE at [3,0,1], UAV starting at
/// [6,6,3] with a 3 m disk at z = 3, half-wavelength ULAs along x.
pub fn scene(n_bs: usize, n_irs: usize) -> SceneGeometry {
    let half = radio(35.0).wavelength() / 2.0;
    SceneGeometry {
        bs_ref: Position3::new(12.0, 0.0, 2.0),
        ue_true: Position3::new(3.0, 0.0, 1.0),
        uav_ref: Position3::new(6.0, 6.0, 3.0),
        uav_home: Position3::new(6.0, 6.0, 3.0),
        r_max: 3.0,
        bs_array: ArrayLayout::ula_x(n_bs, half),
        irs_array: ArrayLayout::ula_x(n_irs, half),
        uav_plane_z: 3.0,
        planar: true,
    }
}

/// Uniform point in the feasible disk.
pub fn random_feasible<R: Rng>(scene: &SceneGeometry, rng: &mut R) -> Position3 {
    loop {
        let x = rng.random_range(-1.0..1.0);
        let y = rng.random_range(-1.0..1.0);
        if x * x + y * y <= 1.0 {
            return scene.uav_home + Position3::new(x, y, 0.0) * scene.r_max;
        }
    }
}

/// `h̄` summed term by term with `exp(-j·k·(d_bi + d_iu))`.
pub fn brute_force_channel(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    ue: Position3,
    phases: &PhaseProfile,
) -> Vec<Complex> {
    let lambda = 3.0e8 / radio.carrier_hz;
    let k = 2.0 * std::f64::consts::PI / lambda;
    let bs: Vec<Position3> = (0..scene.bs_array.num_elements)
        .map(|b| scene.bs_ref + scene.bs_array.offset(b))
        .collect();
    let irs: Vec<Position3> = (0..scene.irs_array.num_elements)
        .map(|i| scene.uav_ref + scene.irs_array.offset(i))
        .collect();
    let sqrt_rho_u = radio.gain_ue.sqrt() * lambda / (4.0 * std::f64::consts::PI * scene.uav_ref.distance(&ue));
    let sqrt_rho_b =
        radio.gain_bs.sqrt() * lambda / (4.0 * std::f64::consts::PI * scene.bs_ref.distance(&scene.uav_ref));
    bs.iter()
        .map(|pb| {
            let mut acc = Complex::new(0.0, 0.0);
            for (i, pi) in irs.iter().enumerate() {
                let theta = phases.phases[i] - k * (pi.distance(pb) + ue.distance(pi));
                acc += Complex::new(theta.cos(), theta.sin());
            }
            acc * sqrt_rho_u * sqrt_rho_b
        })
        .collect()
}

pub fn brute_force_norm_sq(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    ue: Position3,
    phases: &PhaseProfile,
) -> f64 {
    brute_force_channel(scene, radio, ue, phases).iter().map(|h| h.norm_sqr()).sum()
}

/// Ball projection by bisection on the KKT multiplier of
/// `min ‖q − p‖² s.t. ‖q − home‖² ≤ r²`, where `q(μ) = (p + μ·home)/(1 + μ)`.
pub fn projection_oracle(p: Position3, home: Position3, r: f64) -> Position3 {
    let q = |mu: f64| (p + home * mu) * (1.0 / (1.0 + mu));
    if q(0.0).distance(&home) <= r {
        return p;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while q(hi).distance(&home) > r {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid).distance(&home) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    q(hi)
}

/// Path phases `θ[b][i] = k·(d_bi + d_iu)`, shifted by a common constant
/// (the spread objective does not see common shifts).
pub fn path_phases(scene: &SceneGeometry, radio: &RadioConfig, ue: Position3) -> Vec<Vec<f64>> {
    let d = distance_matrix_irs_bs(scene).unwrap();
    let du = distance_vector_ue_irs(scene, ue).unwrap();
    let k = radio.wavenumber();
    let offset = d.get(0, 0) + du[0];
    (0..d.rows)
        .map(|b| (0..d.cols).map(|i| k * ((d.get(b, i) + du[i]) - offset)).collect())
        .collect()
}

/// Summed squared deviation of the arriving phases from their centroid.
pub fn phase_spread(w: &[f64], theta: &[Vec<f64>]) -> f64 {
    let n = (theta.len() * w.len()) as f64;
    let centroid: f64 = theta
        .iter()
        .flat_map(|row| row.iter().zip(w).map(|(t, wi)| wi - t))
        .sum::<f64>()
        / n;
    theta
        .iter()
        .flat_map(|row| row.iter().zip(w).map(move |(t, wi)| (wi - t - centroid).powi(2)))
        .sum()
}

/// Minimizes [`phase_spread`] by exact coordinate-wise parabola steps.
pub fn phase_spread_minimizer(theta: &[Vec<f64>], n_irs: usize) -> Vec<f64> {
    let mut w = vec![0.0; n_irs];
    for _ in 0..500 {
        let mut largest = 0.0f64;
        for k in 0..n_irs {
            let t = w[k];
            let mut at = |x: f64| {
                w[k] = x;
                phase_spread(&w, theta)
            };
            let (fm, f0, fp) = (at(t - 1.0), at(t), at(t + 1.0));
            let curvature = fp - 2.0 * f0 + fm;
            let next = if curvature > 0.0 { t - (fp - fm) / (2.0 * curvature) } else { t };
            w[k] = next;
            largest = largest.max((next - t).abs());
        }
        if largest < 1e-14 {
            break;
        }
    }
    w
}

pub fn mean_centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Central finite difference of `f` along each coordinate.
pub fn central_difference(f: impl Fn(Position3) -> f64, p: Position3, step: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (m, slot) in g.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[m] = step;
        let e = Position3::from(e);
        *slot = (f(p + e) - f(p - e)) / (2.0 * step);
    }
    g
}

/// SNR with the UAV displaced by `delta` from `scene.uav_ref`, evaluated so
/// that rounding in the large absolute path phases is shared by every
/// displacement: base phasors are formed once at the reference point and the
/// displacement enters as a separate small-angle phasor built from
/// cancellation-free distance increments.
pub fn displaced_snr(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
    ue: Position3,
    delta: Position3,
) -> f64 {
    let lambda = 3.0e8 / radio.carrier_hz;
    let k = 2.0 * std::f64::consts::PI / lambda;
    let increment = |a: Position3| (2.0 * a.dot(&delta) + delta.norm_sq()) / ((a + delta).norm() + a.norm());
    let uav = scene.uav_ref + delta;
    let amp = radio.gain_ue.sqrt() * lambda / (4.0 * std::f64::consts::PI * uav.distance(&ue))
        * radio.gain_bs.sqrt()
        * lambda
        / (4.0 * std::f64::consts::PI * uav.distance(&scene.bs_ref));
    let mut total = 0.0;
    for b in 0..scene.bs_array.num_elements {
        let pb = scene.bs_ref + scene.bs_array.offset(b);
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..scene.irs_array.num_elements {
            let pi = scene.uav_ref + scene.irs_array.offset(i);
            let base = phases.phases[i] - k * (pi.distance(&pb) + pi.distance(&ue));
            let shift = -k * (increment(pi - pb) + increment(pi - ue));
            acc += Complex::new(base.cos(), base.sin()) * Complex::new(shift.cos(), shift.sin());
        }
        total += (acc * amp).norm_sqr();
    }
    radio.snr_scale() * total
}
