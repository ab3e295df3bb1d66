//! Grid-search maximum-likelihood localization.
//!
//! At carrier wavelengths of about a centimeter the likelihood oscillates with
//! every wavelength of range, so there is no basin for a local method to
//! descend. The localizer evaluates the full negative log-likelihood on a
//! regular grid in the user's plane and takes the smallest entry.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{self, BsPhasors, PhaseProfile, RadioConfig};
use crate::geometry::{self, Position3, SceneGeometry};
use crate::math;
use crate::{Complex, Error, Result};

/// A square search zone in the horizontal plane `z = plane_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub center: Position3,
    pub half_extent_m: f64,
    pub step_m: f64,
    pub plane_z: f64,
}

impl GridSpec {
    /// 0.4 m square at 2 mm resolution around `center`.
    pub fn around(center: Position3) -> Self {
        Self {
            center,
            half_extent_m: 0.2,
            step_m: 0.002,
            plane_z: center.z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() || !self.plane_z.is_finite() {
            return Err(Error::NonFinite("grid center"));
        }
        if !(self.step_m > 0.0 && self.step_m.is_finite()) {
            return Err(Error::InvalidGrid("step must be positive"));
        }
        if !(self.half_extent_m >= self.step_m / 2.0 && self.half_extent_m.is_finite()) {
            return Err(Error::InvalidGrid("half extent must be at least half a step"));
        }
        Ok(())
    }

    /// Grid points along each axis, endpoints included.
    pub fn points_per_axis(&self) -> usize {
        // The slack absorbs ratios like 0.4 / 0.002 landing just under an integer.
        math::floor(2.0 * self.half_extent_m / self.step_m + 1e-9) as usize + 1
    }

    pub fn num_points(&self) -> usize {
        let n = self.points_per_axis();
        n * n
    }

    /// Grid node at column `ix` (x) and row `iy` (y). Nodes are symmetric
    /// about the center, so an odd count puts a node exactly on it.
    pub fn point(&self, ix: usize, iy: usize) -> Position3 {
        let mid = (self.points_per_axis() - 1) as f64 / 2.0;
        Position3::new(
            self.center.x + (ix as f64 - mid) * self.step_m,
            self.center.y + (iy as f64 - mid) * self.step_m,
            self.plane_z,
        )
    }
}

/// The negative log-likelihood over every grid node, row-major in `(y, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// `(row, col)` = `(iy, ix)` of the minimum; ties go to the lowest
    /// row-major index.
    pub argmin_index: (usize, usize),
    pub estimate: Position3,
}

impl LikelihoodField {
    /// Builds the field from precomputed values, locating the argmin.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        let n = grid.points_per_axis();
        if values.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: values.len(),
            });
        }
        let mut best = 0;
        for (idx, &v) in values.iter().enumerate() {
            if v < values[best] || values[best].is_nan() {
                best = idx;
            }
        }
        let (row, col) = (best / n, best % n);
        Ok(Self {
            grid,
            estimate: grid.point(col, row),
            argmin_index: (row, col),
            values,
        })
    }

    pub fn min_value(&self) -> f64 {
        let (row, col) = self.argmin_index;
        self.values[row * self.grid.points_per_axis() + col]
    }
}

/// `1/σ²`, or `1` in the noiseless limit so the field stays finite.
fn likelihood_scale(radio: &RadioConfig) -> f64 {
    if radio.noise_power_mw > 0.0 {
        1.0 / radio.noise_power_mw
    } else {
        1.0
    }
}

/// `scale · ‖y − sqrt(κP/(1+κ))·h·s‖²`.
fn residual_energy(y: &[Complex], h_bar: &[Complex], radio: &RadioConfig, scale: f64) -> f64 {
    let amp = radio.mean_amplitude();
    let mut acc = 0.0;
    for (yb, hb) in y.iter().zip(h_bar) {
        acc += (yb - hb * amp * radio.pilot).norm_sqr();
    }
    acc * scale
}

/// Negative log-likelihood of `y` for a user at `candidate` (up to an additive
/// constant). In the noiseless limit the `1/σ²` factor is dropped.
pub fn neg_log_likelihood(
    y: &[Complex],
    candidate: Position3,
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
) -> Result<f64> {
    if y.len() != scene.bs_array.num_elements {
        return Err(Error::Dimension {
            expected: scene.bs_array.num_elements,
            got: y.len(),
        });
    }
    let h = channel::los_channel(scene, radio, candidate, phases)?;
    Ok(residual_energy(y, &h.h_bar, radio, likelihood_scale(radio)))
}

/// Evaluates the likelihood at many candidates sharing one UAV configuration.
///
/// The BS-side phasors do not depend on the candidate and are computed once;
/// every per-candidate operation is the one [`neg_log_likelihood`] performs,
/// in the same order, so the two paths agree bit for bit.
pub struct LikelihoodEvaluator<'a> {
    y: &'a [Complex],
    scene: &'a SceneGeometry,
    radio: &'a RadioConfig,
    irs: Vec<Position3>,
    coefficients: Vec<Complex>,
    bs_phasors: BsPhasors,
    wavenumber: f64,
    scale: f64,
}

impl<'a> LikelihoodEvaluator<'a> {
    pub fn new(
        y: &'a [Complex],
        scene: &'a SceneGeometry,
        radio: &'a RadioConfig,
        phases: &PhaseProfile,
    ) -> Result<Self> {
        if y.len() != scene.bs_array.num_elements {
            return Err(Error::Dimension {
                expected: scene.bs_array.num_elements,
                got: y.len(),
            });
        }
        if phases.len() != scene.irs_array.num_elements {
            return Err(Error::Dimension {
                expected: scene.irs_array.num_elements,
                got: phases.len(),
            });
        }
        let irs = scene.irs_elements();
        let d_bs = geometry::distances_between(&scene.bs_elements(), &irs)?;
        let wavenumber = radio.wavenumber();
        Ok(Self {
            y,
            scene,
            radio,
            coefficients: phases.coefficients(),
            bs_phasors: BsPhasors::new(&d_bs, wavenumber),
            irs,
            wavenumber,
            scale: likelihood_scale(radio),
        })
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            v: vec![Complex::new(0.0, 0.0); self.irs.len()],
            h: vec![Complex::new(0.0, 0.0); self.y.len()],
        }
    }

    pub fn evaluate(&self, candidate: Position3, scratch: &mut Scratch) -> Result<f64> {
        let d_ue = geometry::distances_to(&self.irs, candidate)?;
        let (ga, gb) = channel::sqrt_path_gains(self.scene, self.radio, candidate)?;
        channel::ue_phasors_into(&self.coefficients, &d_ue, self.wavenumber, &mut scratch.v);
        self.bs_phasors.combine_into(&scratch.v, ga * gb, &mut scratch.h);
        Ok(residual_energy(self.y, &scratch.h, self.radio, self.scale))
    }

    /// Fills `out` with the likelihood along grid row `iy`.
    pub fn evaluate_row(
        &self,
        grid: &GridSpec,
        iy: usize,
        out: &mut [f64],
        scratch: &mut Scratch,
    ) -> Result<()> {
        for (ix, slot) in out.iter_mut().enumerate() {
            *slot = self.evaluate(grid.point(ix, iy), scratch)?;
        }
        Ok(())
    }
}

/// Per-worker buffers for [`LikelihoodEvaluator`].
pub struct Scratch {
    v: Vec<Complex>,
    h: Vec<Complex>,
}

/// Exhaustive grid-search MLE of the user position from one received pilot.
pub fn grid_search_mle(
    y: &[Complex],
    grid: &GridSpec,
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
) -> Result<LikelihoodField> {
    grid.validate()?;
    let eval = LikelihoodEvaluator::new(y, scene, radio, phases)?;
    let n = grid.points_per_axis();
    let mut values = vec![0.0; n * n];
    let mut scratch = eval.scratch();
    for (iy, row) in values.chunks_mut(n).enumerate() {
        eval.evaluate_row(grid, iy, row, &mut scratch)?;
    }
    LikelihoodField::from_values(*grid, values)
}
