//! Rayon-backed versions of the grid search and the Monte Carlo loop.
//!
//! Work is split into independent units (grid rows, paired trials) whose
//! results are collected in index order, so every output is identical to the
//! sequential path.

use irsloc_core::estimation::{GridSpec, LikelihoodEvaluator, LikelihoodField};
use irsloc_core::experiment::{self, MonteCarloReport, TrialSetup};
use irsloc_core::{Complex, PhaseProfile, RadioConfig, SceneGeometry, SchemeId};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Grid-search MLE with rows evaluated in parallel.
pub fn grid_search_mle(
    y: &[Complex],
    grid: &GridSpec,
    scene: &SceneGeometry,
    radio: &RadioConfig,
    phases: &PhaseProfile,
) -> irsloc_core::Result<LikelihoodField> {
    grid.validate()?;
    let eval = LikelihoodEvaluator::new(y, scene, radio, phases)?;
    let n = grid.points_per_axis();
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .try_for_each_init(|| eval.scratch(), |scratch, (iy, row)| eval.evaluate_row(grid, iy, row, scratch))?;
    LikelihoodField::from_values(*grid, values)
}

/// Monte Carlo comparison with paired trials as the unit of parallelism.
pub fn monte_carlo(
    schemes: &[SchemeId],
    powers_dbm: &[f64],
    num_trials: usize,
    base_seed: u64,
    setup: &TrialSetup,
    execution: Execution,
) -> irsloc_core::Result<MonteCarloReport> {
    if execution == Execution::Sequential {
        return experiment::monte_carlo(schemes, powers_dbm, num_trials, base_seed, setup);
    }
    experiment::check_plan(schemes, powers_dbm, num_trials)?;
    setup.validate()?;
    let per_job = experiment::trial_order(powers_dbm, num_trials)
        .into_par_iter()
        .map(|(power, m)| {
            experiment::run_paired_trial(schemes, setup, power, m, experiment::trial_seed(base_seed, m))
        })
        .collect::<irsloc_core::Result<Vec<_>>>()?;
    let records = per_job.into_iter().flatten().collect();
    MonteCarloReport::from_records(schemes, powers_dbm, num_trials, base_seed, records)
}
