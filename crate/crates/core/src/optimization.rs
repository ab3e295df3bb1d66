//! UAV position and IRS phase optimization.
//!
//! The objective is the receiving SNR evaluated at the user *estimate*. The
//! position step is projected gradient ascent on the feasible disk, with an
//! analytic gradient of the channel under rigid translation of the IRS. The
//! phase step is the closed-form centroid rule: every element's phase is set
//! so that, averaged over BS antennas, all reflected paths arrive with the
//! same phase. [`joint_optimize`] alternates the two.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{self, BsPhasors, PhaseProfile, RadioConfig};
use crate::geometry::{self, Position3, SceneGeometry};
use crate::{Complex, Error, Result};

/// Step shrink factor used by backtracking.
pub const BACKTRACK_SHRINK: f64 = 0.5;
/// Halvings tried before a position step is abandoned.
pub const MAX_HALVINGS: u32 = 30;
/// Gradient norms below this end the inner loop.
pub const DEGENERATE_GRADIENT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backtracking {
    #[default]
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimConfig {
    /// Gradient ascent step `k_p`, meters per unit of SNR gradient.
    pub step_kp: f64,
    /// Outer stopping threshold, as a fraction of the current objective.
    pub eps_outer: f64,
    /// Inner stopping threshold, as a fraction of the current objective.
    pub eps_inner: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub backtracking: Backtracking,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            step_kp: 1e-4,
            eps_outer: 1e-4,
            eps_inner: 1e-4,
            max_inner_iters: 50,
            max_outer_iters: 10,
            backtracking: Backtracking::On,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_kp > 0.0 && self.step_kp.is_finite()) {
            return Err(Error::InvalidOptim("step_kp must be positive"));
        }
        if !(self.eps_outer > 0.0 && self.eps_inner > 0.0) {
            return Err(Error::InvalidOptim("tolerances must be positive"));
        }
        if self.max_inner_iters == 0 || self.max_outer_iters == 0 {
            return Err(Error::InvalidOptim("iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// One accepted UAV position and the objective there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub outer_round: usize,
    pub snr: f64,
    pub position: Position3,
}

/// Diagnostics of an optimization run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimTrace {
    /// Objective after each outer round, starting with the initial value.
    pub outer_snr: Vec<f64>,
    /// Objective along each inner (position) loop, starting point included.
    pub inner_snr: Vec<Vec<f64>>,
    /// Every accepted position in visiting order.
    pub steps: Vec<TraceStep>,
    /// Phases in force after each outer round, initial profile first.
    pub phase_history: Vec<PhaseProfile>,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
}

impl OptimTrace {
    pub fn positions(&self) -> impl Iterator<Item = Position3> + '_ {
        self.steps.iter().map(|s| s.position)
    }
}

/// Result of one projected-gradient run at fixed phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionRun {
    pub position: Position3,
    pub snr: Vec<f64>,
    pub positions: Vec<Position3>,
    pub iterations: usize,
}

impl PositionRun {
    pub fn final_snr(&self) -> f64 {
        *self.snr.last().expect("a run records its starting point")
    }
}

/// Gradient of the SNR with respect to the UAV reference point, with the IRS
/// translating rigidly and the user assumed at `ue_estimate`. In planar mode
/// the vertical component is zero.
pub fn snr_gradient(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
    ue_estimate: Position3,
) -> Result<Position3> {
    if phases.len() != scene.irs_array.num_elements {
        return Err(Error::Dimension {
            expected: scene.irs_array.num_elements,
            got: phases.len(),
        });
    }
    let bs = scene.bs_elements();
    let irs = scene.irs_elements();
    let d_bs = geometry::distances_between(&bs, &irs)?;
    let d_ue = geometry::distances_to(&irs, ue_estimate)?;
    let (ga, gb) = channel::sqrt_path_gains(scene, radio, ue_estimate)?;
    let amp = ga * gb;
    let k = radio.wavenumber();

    let e = BsPhasors::new(&d_bs, k);
    let mut v = vec![Complex::new(0.0, 0.0); irs.len()];
    channel::ue_phasors_into(&phases.coefficients(), &d_ue, k, &mut v);

    // Amplitude term: derivative of log(sqrt(rho_ue_irs · rho_irs_bs)).
    let to_ue = scene.uav_ref - ue_estimate;
    let to_bs = scene.uav_ref - scene.bs_ref;
    let amp_term = -(to_ue * (1.0 / to_ue.norm_sq()) + to_bs * (1.0 / to_bs.norm_sq()));

    let mut grad = [0.0f64; 3];
    for (b, pb) in bs.iter().enumerate() {
        let mut h = Complex::new(0.0, 0.0);
        // Σ_i T[b,i]·B_{b,i,m} for each coordinate m.
        let mut weighted = [Complex::new(0.0, 0.0); 3];
        for (i, pi) in irs.iter().enumerate() {
            let term = e.data[b * e.cols + i] * v[i];
            h += term;
            let dir_bs = (*pi - *pb) * (1.0 / d_bs.get(b, i));
            let dir_ue = (*pi - ue_estimate) * (1.0 / d_ue[i]);
            let phase_term = dir_bs + dir_ue;
            for (m, acc) in weighted.iter_mut().enumerate() {
                *acc += term * phase_term.coord(m);
            }
        }
        let h = h * amp;
        for m in 0..3 {
            let dh = h * amp_term.coord(m) - Complex::new(0.0, k) * weighted[m] * amp;
            grad[m] += 2.0 * (dh * h.conj()).re;
        }
    }
    let scale = radio.snr_scale();
    let mut g = Position3::from(grad) * scale;
    if scene.planar {
        g.z = 0.0;
    }
    Ok(g)
}

/// Projected gradient ascent on the UAV position at fixed phases, starting
/// from `scene.uav_ref`.
pub fn optimize_position(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
    ue_estimate: Position3,
    cfg: &OptimConfig,
) -> Result<PositionRun> {
    scene.validate()?;
    let objective = |p: Position3| channel::snr_at(&scene.moved_to(p), radio, phases, ue_estimate);

    let mut p = scene.uav_ref;
    let mut current = objective(p)?;
    let mut run = PositionRun {
        position: p,
        snr: vec![current],
        positions: vec![p],
        iterations: 0,
    };
    let attempts = match cfg.backtracking {
        Backtracking::On => MAX_HALVINGS + 1,
        Backtracking::Off => 1,
    };

    for _ in 0..cfg.max_inner_iters {
        let g = snr_gradient(&scene.moved_to(p), radio, phases, ue_estimate)?;
        if g.norm().is_nan() || g.norm() < DEGENERATE_GRADIENT {
            break;
        }
        let mut step = cfg.step_kp;
        let mut accepted = None;
        for _ in 0..attempts {
            let candidate = scene.project(p + g * step);
            let value = objective(candidate)?;
            if cfg.backtracking == Backtracking::Off || value > current {
                accepted = Some((candidate, value));
                break;
            }
            step *= BACKTRACK_SHRINK;
        }
        let Some((next, value)) = accepted else {
            break;
        };
        let improvement = value - current;
        p = next;
        current = value;
        run.iterations += 1;
        run.snr.push(current);
        run.positions.push(p);
        if improvement <= cfg.eps_inner * current {
            break;
        }
    }
    run.position = p;
    Ok(run)
}

/// Closed-form centroid phases for the UAV at `scene.uav_ref` and the user at
/// `ue_estimate`.
///
/// Element `k` gets `(2π/λ)·mean_b[(d_bk + d_ku) − mean_i(d_bi + d_iu)]`, the
/// unique zero-mean minimizer of the summed squared deviation of the arriving
/// path phases from their centroid.
pub fn optimal_phase(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    ue_estimate: Position3,
) -> Result<PhaseProfile> {
    let irs = scene.irs_elements();
    let d_bs = geometry::distances_between(&scene.bs_elements(), &irs)?;
    let d_ue = geometry::distances_to(&irs, ue_estimate)?;
    let n_irs = irs.len();
    let n_bs = d_bs.rows;

    let mut acc = vec![0.0; n_irs];
    for b in 0..n_bs {
        let row = d_bs.row(b);
        let centroid = row.iter().zip(&d_ue).map(|(a, c)| a + c).sum::<f64>() / n_irs as f64;
        for (slot, (dbi, diu)) in acc.iter_mut().zip(row.iter().zip(&d_ue)) {
            *slot += (dbi + diu) - centroid;
        }
    }
    let scale = radio.wavenumber() / n_bs as f64;
    Ok(PhaseProfile::new(acc.into_iter().map(|x| x * scale).collect()))
}

/// Outcome of [`joint_optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    pub position: Position3,
    pub phases: PhaseProfile,
    pub snr: f64,
    pub trace: OptimTrace,
}

/// Alternates projected gradient ascent on the position (phases fixed) with
/// the centroid phase rule (position fixed) until the outer improvement drops
/// below `eps_outer` of the objective or `max_outer_iters` rounds have run.
///
/// A phase update that would lower the objective is rejected and the previous
/// phases are kept, so the outer trace never decreases.
pub fn joint_optimize(
    scene: &SceneGeometry,
    radio: &RadioConfig,
    ue_estimate: Position3,
    initial_phases: &PhaseProfile,
    cfg: &OptimConfig,
) -> Result<JointSolution> {
    scene.validate()?;
    let mut position = scene.uav_ref;
    let mut phases = initial_phases.clone();
    let mut current = channel::snr_at(scene, radio, &phases, ue_estimate)?;
    let mut trace = OptimTrace {
        outer_snr: vec![current],
        phase_history: vec![phases.clone()],
        steps: vec![TraceStep {
            outer_round: 0,
            snr: current,
            position,
        }],
        ..OptimTrace::default()
    };

    for round in 1..=cfg.max_outer_iters {
        let previous = current;
        let here = scene.moved_to(position);
        let run = optimize_position(&here, radio, &phases, ue_estimate, cfg)?;
        position = run.position;
        trace.inner_iterations += run.iterations;
        for (p, s) in run.positions.iter().zip(&run.snr).skip(1) {
            trace.steps.push(TraceStep {
                outer_round: round,
                snr: *s,
                position: *p,
            });
        }
        current = run.final_snr();
        trace.inner_snr.push(run.snr);

        let here = scene.moved_to(position);
        let candidate = optimal_phase(&here, radio, ue_estimate)?;
        let value = channel::snr_at(&here, radio, &candidate, ue_estimate)?;
        if value >= current {
            phases = candidate;
            current = value;
        }
        trace.outer_iterations = round;
        trace.outer_snr.push(current);
        trace.phase_history.push(phases.clone());
        if current - previous <= cfg.eps_outer * current {
            break;
        }
    }

    Ok(JointSolution {
        position,
        phases,
        snr: current,
        trace,
    })
}
