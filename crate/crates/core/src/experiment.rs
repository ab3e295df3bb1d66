//! The three-step localization pipeline and the four-scheme Monte Carlo
//! comparison.
//!
//! A trial (1) localizes the user roughly with the UAV at its initial position
//! and random phases, (2) reconfigures the UAV and/or phases according to the
//! scheme, using the rough estimate as the user position, and (3) localizes
//! again from a fresh pilot under the new configuration.
//!
//! Randomness per trial comes from one 64-bit seed split into independent
//! ChaCha streams: initial phases, the step-1 noise and the step-3 noise. All
//! schemes of a trial see the same three streams.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, PhaseProfile, RadioConfig, ReceivedSignal};
use crate::estimation::{self, GridSpec};
use crate::geometry::{Position3, SceneGeometry};
use crate::math;
use crate::optimization::{self, OptimConfig, OptimTrace};
use crate::{Error, Result};

const PHASE_STREAM: u64 = 0;
const ROUGH_NOISE_STREAM: u64 = 1;
const FINAL_NOISE_STREAM: u64 = 2;

/// UAV position / IRS phase design scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    /// (a) alternating position and phase optimization.
    JointOpt,
    /// (b) centroid phases at the initial position.
    PhaseOnly,
    /// (c) projected gradient ascent on the position, random phases kept.
    PositionOnly,
    /// (d) initial position and random phases.
    Baseline,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [
        SchemeId::JointOpt,
        SchemeId::PhaseOnly,
        SchemeId::PositionOnly,
        SchemeId::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::JointOpt => "joint",
            SchemeId::PhaseOnly => "phase-only",
            SchemeId::PositionOnly => "position-only",
            SchemeId::Baseline => "baseline",
        }
    }

    pub fn letter(self) -> char {
        match self {
            SchemeId::JointOpt => 'a',
            SchemeId::PhaseOnly => 'b',
            SchemeId::PositionOnly => 'c',
            SchemeId::Baseline => 'd',
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| s == id.name() || (s.len() == 1 && s.starts_with(id.letter())))
            .ok_or(Error::InvalidExperiment("unknown scheme"))
    }
}

/// Everything a trial needs besides the scheme, power and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSetup {
    /// `uav_ref` is the initial UAV position.
    pub scene: SceneGeometry,
    /// Transmit power is overridden per trial.
    pub radio: RadioConfig,
    pub grid: GridSpec,
    /// Grid for the step-1 rough estimate; `None` reuses `grid`.
    pub rough_grid: Option<GridSpec>,
    pub optim: OptimConfig,
}

impl TrialSetup {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.radio.validate()?;
        self.grid.validate()?;
        if let Some(g) = &self.rough_grid {
            g.validate()?;
        }
        self.optim.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub scheme: SchemeId,
    pub tx_power_dbm: f64,
    pub rough_estimate: Position3,
    pub final_estimate: Position3,
    pub final_uav: Position3,
    pub final_phases: PhaseProfile,
    /// SNR at the true user position under the final configuration.
    pub final_snr_linear: f64,
    pub position_error_m: f64,
}

impl TrialRecord {
    pub fn final_snr_db(&self) -> f64 {
        math::to_db(self.final_snr_linear)
    }
}

/// Per-trial seed: `base_seed + trial_index`, wrapping.
pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    base_seed.wrapping_add(trial_index)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Step 1 inputs of a trial: the random initial phases and the pilot received
/// with the UAV at its initial position.
pub fn rough_observation(
    setup: &TrialSetup,
    tx_power_dbm: f64,
    seed: u64,
) -> Result<(PhaseProfile, ReceivedSignal)> {
    let radio = setup.radio.with_tx_power_dbm(tx_power_dbm);
    let phases = PhaseProfile::random(setup.scene.irs_array.num_elements, &mut stream(seed, PHASE_STREAM));
    let signal = channel::sample_received_signal(
        &setup.scene,
        &radio,
        &phases,
        &mut stream(seed, ROUGH_NOISE_STREAM),
    )?;
    Ok((phases, signal))
}

/// Reruns steps 1 and 2 of a joint-optimization trial and returns the
/// optimizer's trace.
pub fn joint_trace(setup: &TrialSetup, tx_power_dbm: f64, seed: u64) -> Result<OptimTrace> {
    let radio = setup.radio.with_tx_power_dbm(tx_power_dbm);
    let (phases, signal) = rough_observation(setup, tx_power_dbm, seed)?;
    let rough_grid = setup.rough_grid.as_ref().unwrap_or(&setup.grid);
    let rough = estimation::grid_search_mle(&signal.y, rough_grid, &setup.scene, &radio, &phases)?.estimate;
    Ok(optimization::joint_optimize(&setup.scene, &radio, rough, &phases, &setup.optim)?.trace)
}

/// Runs one trial for a single scheme.
pub fn run_trial(
    scheme: SchemeId,
    setup: &TrialSetup,
    tx_power_dbm: f64,
    trial_index: u64,
    seed: u64,
) -> Result<TrialRecord> {
    let mut records = run_paired_trial(&[scheme], setup, tx_power_dbm, trial_index, seed)?;
    Ok(records.remove(0))
}

/// Runs one trial for several schemes sharing the step-1 rough estimate.
///
/// Identical to calling [`run_trial`] once per scheme, since step 1 does not
/// depend on the scheme.
pub fn run_paired_trial(
    schemes: &[SchemeId],
    setup: &TrialSetup,
    tx_power_dbm: f64,
    trial_index: u64,
    seed: u64,
) -> Result<Vec<TrialRecord>> {
    let radio = setup.radio.with_tx_power_dbm(tx_power_dbm);
    let scene = &setup.scene;
    let (initial_phases, rough_signal) = rough_observation(setup, tx_power_dbm, seed)?;
    let rough_grid = setup.rough_grid.as_ref().unwrap_or(&setup.grid);
    let rough = estimation::grid_search_mle(&rough_signal.y, rough_grid, scene, &radio, &initial_phases)?
        .estimate;

    let mut records = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        // Step 2: reconfigure using the rough estimate.
        let (uav, phases) = match scheme {
            SchemeId::JointOpt => {
                let sol = optimization::joint_optimize(scene, &radio, rough, &initial_phases, &setup.optim)?;
                (sol.position, sol.phases)
            }
            SchemeId::PhaseOnly => (scene.uav_ref, optimization::optimal_phase(scene, &radio, rough)?),
            SchemeId::PositionOnly => {
                let run = optimization::optimize_position(scene, &radio, &initial_phases, rough, &setup.optim)?;
                (run.position, initial_phases.clone())
            }
            SchemeId::Baseline => (scene.uav_ref, initial_phases.clone()),
        };

        // Step 3: fresh pilot under the new configuration.
        let final_scene = scene.with_uav(uav)?;
        let signal = channel::sample_received_signal(
            &final_scene,
            &radio,
            &phases,
            &mut stream(seed, FINAL_NOISE_STREAM),
        )?;
        let estimate =
            estimation::grid_search_mle(&signal.y, &setup.grid, &final_scene, &radio, &phases)?.estimate;
        let final_snr_linear = channel::snr(&final_scene, &radio, &phases)?;

        records.push(TrialRecord {
            trial_index,
            seed,
            scheme,
            tx_power_dbm,
            rough_estimate: rough,
            final_estimate: estimate,
            final_uav: uav,
            final_phases: phases,
            final_snr_linear,
            position_error_m: estimate.distance(&scene.ue_true),
        });
    }
    Ok(records)
}

/// Aggregates for one (scheme, power) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub scheme: SchemeId,
    pub tx_power_dbm: f64,
    pub num_trials: usize,
    pub rmse_m: f64,
    pub avg_snr_linear: f64,
    pub avg_snr_db: f64,
    /// Sample standard deviation of the per-trial SNR in dB.
    pub snr_db_std: f64,
    pub trials: Vec<TrialRecord>,
}

impl CellSummary {
    pub fn from_trials(scheme: SchemeId, tx_power_dbm: f64, trials: Vec<TrialRecord>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::InvalidExperiment("a cell needs at least one trial"));
        }
        let m = trials.len() as f64;
        let rmse_m = math::sqrt(trials.iter().map(|t| t.position_error_m * t.position_error_m).sum::<f64>() / m);
        let avg_snr_linear = trials.iter().map(|t| t.final_snr_linear).sum::<f64>() / m;
        let mean_db = trials.iter().map(|t| t.final_snr_db()).sum::<f64>() / m;
        let snr_db_std = if trials.len() > 1 {
            math::sqrt(
                trials.iter().map(|t| (t.final_snr_db() - mean_db) * (t.final_snr_db() - mean_db)).sum::<f64>()
                    / (m - 1.0),
            )
        } else {
            0.0
        };
        Ok(Self {
            scheme,
            tx_power_dbm,
            num_trials: trials.len(),
            rmse_m,
            avg_snr_linear,
            avg_snr_db: math::to_db(avg_snr_linear),
            snr_db_std,
            trials,
        })
    }
}

/// Monte Carlo results, one cell per (power, scheme) in power-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub base_seed: u64,
    pub cells: Vec<CellSummary>,
}

impl MonteCarloReport {
    /// Groups records produced in [`trial_order`] into cells.
    pub fn from_records(
        schemes: &[SchemeId],
        powers_dbm: &[f64],
        num_trials: usize,
        base_seed: u64,
        records: Vec<TrialRecord>,
    ) -> Result<Self> {
        if records.len() != schemes.len() * powers_dbm.len() * num_trials {
            return Err(Error::Dimension {
                expected: schemes.len() * powers_dbm.len() * num_trials,
                got: records.len(),
            });
        }
        // Records arrive as (power, trial, scheme); regroup per (power, scheme).
        let mut buckets: Vec<Vec<TrialRecord>> = (0..powers_dbm.len() * schemes.len())
            .map(|_| Vec::with_capacity(num_trials))
            .collect();
        for (n, record) in records.into_iter().enumerate() {
            let power_idx = n / (num_trials * schemes.len());
            let scheme_idx = n % schemes.len();
            buckets[power_idx * schemes.len() + scheme_idx].push(record);
        }
        let cells = buckets
            .into_iter()
            .enumerate()
            .map(|(c, trials)| {
                CellSummary::from_trials(schemes[c % schemes.len()], powers_dbm[c / schemes.len()], trials)
            })
            .collect::<Result<_>>()?;
        Ok(Self { base_seed, cells })
    }

    pub fn cell(&self, scheme: SchemeId, tx_power_dbm: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.tx_power_dbm == tx_power_dbm)
    }

    pub fn records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.cells.iter().flat_map(|c| c.trials.iter())
    }
}

/// The (power, trial index) jobs of a Monte Carlo run, in aggregation order.
/// Each job yields one record per scheme.
pub fn trial_order(powers_dbm: &[f64], num_trials: usize) -> Vec<(f64, u64)> {
    powers_dbm
        .iter()
        .flat_map(|&p| (0..num_trials as u64).map(move |m| (p, m)))
        .collect()
}

/// Sequential Monte Carlo comparison.
pub fn monte_carlo(
    schemes: &[SchemeId],
    powers_dbm: &[f64],
    num_trials: usize,
    base_seed: u64,
    setup: &TrialSetup,
) -> Result<MonteCarloReport> {
    check_plan(schemes, powers_dbm, num_trials)?;
    setup.validate()?;
    let mut records = Vec::with_capacity(schemes.len() * powers_dbm.len() * num_trials);
    for (power, m) in trial_order(powers_dbm, num_trials) {
        records.extend(run_paired_trial(schemes, setup, power, m, trial_seed(base_seed, m))?);
    }
    MonteCarloReport::from_records(schemes, powers_dbm, num_trials, base_seed, records)
}

pub fn check_plan(schemes: &[SchemeId], powers_dbm: &[f64], num_trials: usize) -> Result<()> {
    if num_trials == 0 {
        return Err(Error::InvalidExperiment("at least one trial is required"));
    }
    if schemes.is_empty() || powers_dbm.is_empty() {
        return Err(Error::InvalidExperiment("need at least one scheme and one power"));
    }
    if powers_dbm.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidExperiment("transmit powers must be finite"));
    }
    Ok(())
}
