//! The reflected near-field channel, the received pilot and the receiving SNR.
//!
//! The line-of-sight part of the UE→IRS→BS channel at BS antenna `b` is
//!
//! ```text
//! h[b] = sqrt(rho_ue_irs · rho_irs_bs) · Σ_i w[i] · exp(-j·(2π/λ)·(d_bi + d_iu))
//! ```
//!
//! with exact per-element spherical distances. The NLoS part and thermal noise
//! are only ever seen through their combined complex Gaussian, so the received
//! pilot is `y = sqrt(κP/(1+κ))·h·s + n` with `n ~ CN(0, σ²I)`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{self, DistanceMatrix, Position3, SceneGeometry};
use crate::math::{self, SPEED_OF_LIGHT, TWO_PI};
use crate::{Complex, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    /// Transmit power `P`, linear (mW).
    pub tx_power_mw: f64,
    pub rician_kappa: f64,
    /// Combined NLoS-plus-thermal noise power `σ²`, linear (mW).
    pub noise_power_mw: f64,
    pub gain_ue: f64,
    pub gain_bs: f64,
    /// Pilot symbol `s`, unit modulus.
    pub pilot: Complex,
}

impl RadioConfig {
    /// Unit antenna gains and a pilot of `1`.
    pub fn from_dbm(carrier_hz: f64, tx_power_dbm: f64, rician_kappa: f64, noise_dbm: f64) -> Self {
        Self {
            carrier_hz,
            tx_power_mw: math::dbm_to_mw(tx_power_dbm),
            rician_kappa,
            noise_power_mw: math::dbm_to_mw(noise_dbm),
            gain_ue: 1.0,
            gain_bs: 1.0,
            pilot: Complex::new(1.0, 0.0),
        }
    }

    pub fn with_tx_power_dbm(self, tx_power_dbm: f64) -> Self {
        Self {
            tx_power_mw: math::dbm_to_mw(tx_power_dbm),
            ..self
        }
    }

    /// A noiseless copy, used for identifiability checks.
    pub fn noiseless(self) -> Self {
        Self {
            noise_power_mw: 0.0,
            ..self
        }
    }

    /// `λ = c / f_c`.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// `2π / λ`.
    pub fn wavenumber(&self) -> f64 {
        TWO_PI / self.wavelength()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::InvalidRadio("carrier frequency must be positive"));
        }
        if !(self.tx_power_mw > 0.0 && self.tx_power_mw.is_finite()) {
            return Err(Error::InvalidRadio("transmit power must be positive"));
        }
        // Zero noise is allowed; it is the identifiability limit of the model.
        if !(self.noise_power_mw >= 0.0 && self.noise_power_mw.is_finite()) {
            return Err(Error::InvalidRadio("noise power must be non-negative"));
        }
        if !(self.rician_kappa >= 0.0 && self.rician_kappa.is_finite()) {
            return Err(Error::InvalidRadio("Rician factor must be non-negative"));
        }
        if !(self.gain_ue > 0.0 && self.gain_bs > 0.0) {
            return Err(Error::InvalidRadio("antenna gains must be positive"));
        }
        if (self.pilot.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidRadio("pilot symbol must have unit modulus"));
        }
        Ok(())
    }

    /// `sqrt(κP/(1+κ))`, the amplitude of the line-of-sight mean.
    pub fn mean_amplitude(&self) -> f64 {
        math::sqrt(self.rician_kappa * self.tx_power_mw / (1.0 + self.rician_kappa))
    }

    /// `κP/((1+κ)σ²)`, the factor in front of `‖h‖²` in the SNR.
    pub fn snr_scale(&self) -> f64 {
        self.rician_kappa * self.tx_power_mw / ((1.0 + self.rician_kappa) * self.noise_power_mw)
    }
}

/// IRS reflection phases `w̃`; the coefficients `w = exp(j·w̃)` are derived.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseProfile {
    pub phases: Vec<f64>,
}

impl PhaseProfile {
    pub fn new(phases: Vec<f64>) -> Self {
        Self { phases }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(alloc::vec![0.0; n])
    }

    /// I.i.d. uniform phases on `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::new((0..n).map(|_| rng.random::<f64>() * TWO_PI).collect())
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn coefficients(&self) -> Vec<Complex> {
        self.phases.iter().map(|&p| math::cis(p)).collect()
    }

    /// Every phase advanced by the same constant.
    pub fn shifted(&self, c: f64) -> Self {
        Self::new(self.phases.iter().map(|p| p + c).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosChannel {
    pub h_bar: Vec<Complex>,
    pub rho_ue_irs: f64,
    pub rho_irs_bs: f64,
}

impl LosChannel {
    pub fn norm_sq(&self) -> f64 {
        self.h_bar.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// One received pilot with its noise realization kept for bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub y: Vec<Complex>,
    pub mean: Vec<Complex>,
    pub noise_realization: Vec<Complex>,
}

/// Free-space power gains `(ρ_{u,I}, ρ_{I,B})` for a user at `ue`.
pub fn path_gains(scene: &SceneGeometry, radio: &RadioConfig, ue: Position3) -> Result<(f64, f64)> {
    let (a, b) = sqrt_path_gains(scene, radio, ue)?;
    Ok((a * a, b * b))
}

pub(crate) fn sqrt_path_gains(scene: &SceneGeometry, radio: &RadioConfig, ue: Position3) -> Result<(f64, f64)> {
    let d_ue = scene.uav_ref.distance(&ue);
    let d_bs = scene.bs_ref.distance(&scene.uav_ref);
    if d_ue.is_nan() || d_ue <= 0.0 {
        return Err(Error::Coincident("user and UAV reference point"));
    }
    if d_bs.is_nan() || d_bs <= 0.0 {
        return Err(Error::Coincident("BS and UAV reference point"));
    }
    let lambda = radio.wavelength();
    let four_pi = 2.0 * TWO_PI;
    Ok((
        math::sqrt(radio.gain_ue) * lambda / (four_pi * d_ue),
        math::sqrt(radio.gain_bs) * lambda / (four_pi * d_bs),
    ))
}

/// `exp(-j·k·d_{b,i})` for every antenna/element pair; candidate independent.
#[derive(Debug, Clone)]
pub(crate) struct BsPhasors {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex>,
}

impl BsPhasors {
    pub fn new(d: &DistanceMatrix, wavenumber: f64) -> Self {
        Self {
            rows: d.rows,
            cols: d.cols,
            data: d.data.iter().map(|&x| math::cis(-wavenumber * x)).collect(),
        }
    }

    /// `amp · Σ_i E[b,i]·v[i]` for every `b`, written into `out`.
    #[inline]
    pub fn combine_into(&self, v: &[Complex], amp: f64, out: &mut [Complex]) {
        for (b, slot) in out.iter_mut().enumerate().take(self.rows) {
            let row = &self.data[b * self.cols..(b + 1) * self.cols];
            let mut acc = Complex::new(0.0, 0.0);
            for (e, vi) in row.iter().zip(v) {
                acc += e * vi;
            }
            *slot = acc * amp;
        }
    }
}

/// `w[i]·exp(-j·k·d_{i,u})`, the user-dependent half of each reflected term.
#[inline]
pub(crate) fn ue_phasors_into(w: &[Complex], d_ue: &[f64], wavenumber: f64, out: &mut [Complex]) {
    for ((slot, wi), &d) in out.iter_mut().zip(w).zip(d_ue) {
        *slot = wi * math::cis(-wavenumber * d);
    }
}

/// The line-of-sight channel `h̄` for a user at `ue` (true or candidate).
pub fn los_channel(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    ue: Position3,
    phases: &PhaseProfile,
) -> Result<LosChannel> {
    if phases.len() != scene.irs_array.num_elements {
        return Err(Error::Dimension {
            expected: scene.irs_array.num_elements,
            got: phases.len(),
        });
    }
    let irs = scene.irs_elements();
    let d_bs = geometry::distances_between(&scene.bs_elements(), &irs)?;
    let d_ue = geometry::distances_to(&irs, ue)?;
    let (ga, gb) = sqrt_path_gains(scene, radio, ue)?;
    let k = radio.wavenumber();

    let e = BsPhasors::new(&d_bs, k);
    let mut v = alloc::vec![Complex::new(0.0, 0.0); irs.len()];
    ue_phasors_into(&phases.coefficients(), &d_ue, k, &mut v);
    let mut h_bar = alloc::vec![Complex::new(0.0, 0.0); d_bs.rows];
    e.combine_into(&v, ga * gb, &mut h_bar);
    Ok(LosChannel {
        h_bar,
        rho_ue_irs: ga * ga,
        rho_irs_bs: gb * gb,
    })
}

/// Receiving SNR (linear) at the scene's true user position.
pub fn snr(scene: &SceneGeometry, radio: &RadioConfig, phases: &PhaseProfile) -> Result<f64> {
    snr_at(scene, radio, phases, scene.ue_true)
}

/// Receiving SNR evaluated with the user assumed at `ue`. With `ue` set to an
/// estimate this is the surrogate objective the optimizer climbs.
pub fn snr_at(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
    ue: Position3,
) -> Result<f64> {
    let h = los_channel(scene, radio, ue, phases)?;
    Ok(radio.snr_scale() * h.norm_sq())
}

/// Draws one received pilot at the true user position.
pub fn sample_received_signal<R: Rng + ?Sized>(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    let h = los_channel(scene, radio, scene.ue_true, phases)?;
    let amp = radio.mean_amplitude();
    let mean: Vec<Complex> = h.h_bar.iter().map(|hb| hb * amp * radio.pilot).collect();
    let noise = complex_gaussian(mean.len(), radio.noise_power_mw, rng);
    let y = mean.iter().zip(&noise).map(|(m, n)| m + n).collect();
    Ok(ReceivedSignal {
        y,
        mean,
        noise_realization: noise,
    })
}

/// `n` i.i.d. circularly-symmetric complex Gaussians of total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> Vec<Complex> {
    let sd = math::sqrt(variance / 2.0);
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re * sd, im * sd)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArrayLayout;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn radio() -> RadioConfig {
        RadioConfig::from_dbm(28.0e9, 35.0, 5.0, -125.0)
    }

    fn scene(n_bs: usize, n_irs: usize) -> SceneGeometry {
        let half = radio().wavelength() / 2.0;
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

    #[test]
    fn wavelength_is_derived() {
        assert!((radio().wavelength() - 0.010_714_285_714_285_714).abs() < 1e-15);
    }

    #[test]
    fn path_gain_values() {
        let s = scene(1, 1);
        let (rho_u, rho_b) = path_gains(&s, &radio(), s.ue_true).unwrap();
        assert!((rho_u.sqrt() - 1.218_022_523_662_464e-4).abs() < 1e-16);
        let expected_b = radio().wavelength() / (4.0 * core::f64::consts::PI * 73f64.sqrt());
        assert!((rho_b.sqrt() / expected_b - 1.0).abs() < 1e-14);

        // Inverse-square law in the UE distance.
        let mut far = s.clone();
        far.uav_ref = Position3::new(3.0, 0.0, 15.0);
        far.uav_home = far.uav_ref;
        far.uav_plane_z = 15.0;
        let mut near = far.clone();
        near.uav_ref = Position3::new(3.0, 0.0, 8.0);
        near.uav_home = near.uav_ref;
        near.uav_plane_z = 8.0;
        let (r_far, _) = path_gains(&far, &radio(), far.ue_true).unwrap();
        let (r_near, _) = path_gains(&near, &radio(), near.ue_true).unwrap();
        assert!((r_near / r_far - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_element_channel() {
        let s = scene(1, 1);
        let r = radio();
        let h = los_channel(&s, &r, s.ue_true, &PhaseProfile::zeros(1)).unwrap();
        let amp = (h.rho_ue_irs * h.rho_irs_bs).sqrt();
        let phase = -r.wavenumber() * (73f64.sqrt() + 7.0);
        let expected = Complex::new(phase.cos(), phase.sin()) * amp;
        assert!((h.h_bar[0] - expected).norm() < 1e-12 * amp);
    }

    #[test]
    fn co_phased_single_antenna_is_coherent() {
        let s = scene(1, 16);
        let r = radio();
        let d = geometry::distance_matrix_irs_bs(&s).unwrap();
        let du = geometry::distance_vector_ue_irs(&s, s.ue_true).unwrap();
        let k = r.wavenumber();
        let phases = PhaseProfile::new((0..16).map(|i| k * (d.get(0, i) + du[i])).collect());
        let h = los_channel(&s, &r, s.ue_true, &phases).unwrap();
        let amp = (h.rho_ue_irs * h.rho_irs_bs).sqrt();
        assert!((h.h_bar[0].re / (amp * 16.0) - 1.0).abs() < 1e-10);
        assert!(h.h_bar[0].im.abs() < 1e-9 * amp * 16.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = scene(2, 4);
        assert_eq!(
            los_channel(&s, &radio(), s.ue_true, &PhaseProfile::zeros(3)),
            Err(Error::Dimension {
                expected: 4,
                got: 3
            })
        );
    }

    #[test]
    fn zero_noise_sample_is_the_mean() {
        let s = scene(4, 4);
        let r = radio().noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sig = sample_received_signal(&s, &r, &PhaseProfile::zeros(4), &mut rng).unwrap();
        assert_eq!(sig.y, sig.mean);
    }

    #[test]
    fn bookkeeping_and_determinism() {
        let s = scene(8, 8);
        let r = radio();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phases = PhaseProfile::random(8, &mut rng);
        let a = sample_received_signal(&s, &r, &phases, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_received_signal(&s, &r, &phases, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        for ((y, m), n) in a.y.iter().zip(&a.mean).zip(&a.noise_realization) {
            assert_eq!(*y, m + n);
            assert!((y - n - m).norm() <= 4.0 * f64::EPSILON * y.norm().max(n.norm()));
        }
    }

    #[test]
    fn radio_validation() {
        assert!(radio().validate().is_ok());
        assert!(radio().noiseless().validate().is_ok());
        let mut r = radio();
        r.rician_kappa = -1.0;
        assert!(r.validate().is_err());
        let mut r = radio();
        r.pilot = Complex::new(2.0, 0.0);
        assert!(r.validate().is_err());
        let mut r = radio();
        r.carrier_hz = 0.0;
        assert!(r.validate().is_err());
    }
}
