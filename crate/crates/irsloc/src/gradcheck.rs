//! Analytic SNR gradient versus central finite differences.
//!
//! Path phases are `k·d` with `k·d ≈ 10⁴` rad, so the SNR computed at `p ± h`
//! carries rounding noise of order `10⁻¹²` rad per term, which a `10⁻⁷` m step
//! amplifies past the tolerance on small components. The reference difference
//! therefore forms the phasors once at `p` and applies each displacement as a
//! separate small phase, computed from the cancellation-free increment
//! `|a + δ| − |a| = (2a·δ + |δ|²) / (|a + δ| + |a|)`. The plain difference of
//! [`snr_at`](irsloc_core::channel::snr_at) values is reported alongside.

use irsloc_core::channel::{self, PhaseProfile, RadioConfig};
use irsloc_core::optimization::snr_gradient;
use irsloc_core::{math, Complex, Position3, SceneGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Error;

pub const GRAD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckPoint {
    pub uav: Position3,
    pub analytic: Position3,
    pub finite_difference: Position3,
    /// Per checked component; absolute where both values are zero.
    pub rel_error: Vec<f64>,
    pub plain_rel_error: Vec<f64>,
}

impl GradCheckPoint {
    pub fn max_error(&self) -> f64 {
        self.rel_error.iter().fold(0.0, |m, &e| m.max(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub points: Vec<GradCheckPoint>,
    pub fd_step: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.max_error()))
    }

    pub fn max_plain_rel_error(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.plain_rel_error.iter())
            .fold(0.0, |m, &e| m.max(e))
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < GRAD_TOLERANCE
    }
}

/// `|a − b| / max(|a|, |b|)`, or `|a − b|` when both are zero.
pub fn component_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale > 0.0 {
        (a - b).abs() / scale
    } else {
        (a - b).abs()
    }
}

fn displaced_snr(scene: &SceneGeometry, radio: &RadioConfig, phases: &PhaseProfile, ue: Position3, delta: Position3) -> f64 {
    let k = radio.wavenumber();
    let step = |a: Position3| (2.0 * a.dot(&delta) + delta.norm_sq()) / ((a + delta).norm() + a.norm());
    let uav = scene.uav_ref + delta;
    let four_pi = 2.0 * math::TWO_PI;
    let lambda = radio.wavelength();
    let amp = math::sqrt(radio.gain_ue) * lambda / (four_pi * uav.distance(&ue)) * math::sqrt(radio.gain_bs) * lambda
        / (four_pi * uav.distance(&scene.bs_ref));
    let irs = scene.irs_elements();
    let mut total = 0.0;
    for pb in scene.bs_elements() {
        let mut acc = Complex::new(0.0, 0.0);
        for (pi, w) in irs.iter().zip(&phases.phases) {
            let base = w - k * (pi.distance(&pb) + pi.distance(&ue));
            let shift = -k * (step(*pi - pb) + step(*pi - ue));
            acc += Complex::from_polar(1.0, base) * Complex::from_polar(1.0, shift);
        }
        total += (acc * amp).norm_sqr();
    }
    radio.snr_scale() * total
}

/// Compares the gradient at `scene.uav_ref` for user position `ue`.
pub fn check_point(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
    ue: Position3,
    fd_step: f64,
) -> Result<GradCheckPoint, Error> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    let analytic = snr_gradient(scene, radio, phases, ue)?;
    let axes = if scene.planar { 2 } else { 3 };
    let mut fd = [0.0; 3];
    let mut plain = [0.0; 3];
    for m in 0..axes {
        let mut e = [0.0; 3];
        e[m] = fd_step;
        let e = Position3::from(e);
        fd[m] = (displaced_snr(scene, radio, phases, ue, e) - displaced_snr(scene, radio, phases, ue, -e)) / (2.0 * fd_step);
        let at = |p: Position3| {
            let moved = SceneGeometry {
                uav_ref: p,
                ..scene.clone()
            };
            channel::snr_at(&moved, radio, phases, ue)
        };
        plain[m] = (at(scene.uav_ref + e)? - at(scene.uav_ref - e)?) / (2.0 * fd_step);
    }
    let a = analytic.to_array();
    Ok(GradCheckPoint {
        uav: scene.uav_ref,
        analytic,
        finite_difference: Position3::from(fd),
        rel_error: (0..axes).map(|m| component_error(a[m], fd[m])).collect(),
        plain_rel_error: (0..axes).map(|m| component_error(a[m], plain[m])).collect(),
    })
}

/// Uniform draw from the feasible disk (planar) or ball.
pub fn random_feasible<R: Rng>(scene: &SceneGeometry, rng: &mut R) -> Position3 {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let z: f64 = if scene.planar { 0.0 } else { rng.random_range(-1.0..1.0) };
        if x * x + y * y + z * z <= 1.0 {
            let mut p = scene.uav_home + Position3::new(x, y, z) * scene.r_max;
            if scene.planar {
                p.z = scene.uav_plane_z;
            }
            return p;
        }
    }
}

/// Checks `num_points` random feasible UAV positions with random phases.
pub fn check_gradients(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    num_points: usize,
    fd_step: f64,
    seed: u64,
) -> Result<GradCheckReport, Error> {
    if num_points == 0 {
        return Err(Error::Config("need at least one point".into()));
    }
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    scene.validate()?;
    radio.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(num_points);
    for _ in 0..num_points {
        let uav = random_feasible(scene, &mut rng);
        let phases = PhaseProfile::random(scene.irs_array.num_elements, &mut rng);
        points.push(check_point(&scene.with_uav(uav)?, radio, &phases, scene.ue_true, fd_step)?);
    }
    Ok(GradCheckReport { points, fd_step })
}
