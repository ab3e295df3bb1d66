//! The work behind each subcommand, separated from argument parsing so tests
//! can drive it directly.

use std::fs;
use std::path::{Path, PathBuf};

use irsloc_core::experiment::{self, MonteCarloReport};
use irsloc_core::{LikelihoodField, SchemeId};

use crate::gradcheck::{self, GradCheckReport};
use crate::output;
use crate::parallel::{self, Execution};
use crate::{Error, ExperimentConfig};

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_FILE: &str = "trace.csv";

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub powers_dbm: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub schemes: Option<Vec<String>>,
    pub coarse_rough_grid: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.plan.base_seed = seed;
        }
        if let Some(p) = &self.powers_dbm {
            config.plan.powers_dbm = p.clone();
        }
        if let Some(m) = self.trials {
            config.plan.trials = m;
        }
        if let Some(s) = &self.schemes {
            config.plan.schemes = s.clone();
        }
        if self.coarse_rough_grid {
            config.grid.coarse_rough_grid = true;
        }
    }
}

/// Reads `path` (or takes the defaults) and applies `overrides`, validating
/// the result.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut config = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub report: MonteCarloReport,
    pub trials_csv: PathBuf,
    pub summary_json: PathBuf,
    /// Written when the joint scheme is part of the run.
    pub trace_csv: Option<PathBuf>,
}

/// Runs the Monte Carlo comparison and writes `trials.csv`, `summary.json`
/// and, for the joint scheme, `trace.csv` (the optimizer trace of trial 0 at
/// the last listed power) into `out_dir`.
pub fn simulate(config: &ExperimentConfig, out_dir: &Path, execution: Execution) -> Result<SimulateOutcome, Error> {
    config.validate()?;
    let setup = config.trial_setup()?;
    let schemes = config.schemes()?;
    let plan = &config.plan;
    let report = parallel::monte_carlo(&schemes, &plan.powers_dbm, plan.trials, plan.base_seed, &setup, execution)?;

    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let trials_csv = out_dir.join(TRIALS_FILE);
    output::write_file(&trials_csv, |w| output::write_trials_csv(&report, w))?;
    let summary_json = out_dir.join(SUMMARY_FILE);
    let summary = output::summary_json(&report);
    output::write_file(&summary_json, |w| {
        use std::io::Write;
        w.write_all(summary.as_bytes()).map_err(|source| Error::Io {
            path: summary_json.clone(),
            source,
        })
    })?;

    let trace_csv = if schemes.contains(&SchemeId::JointOpt) {
        let power = *plan.powers_dbm.last().expect("validated plan has a power");
        let trace = experiment::joint_trace(&setup, power, experiment::trial_seed(plan.base_seed, 0))?;
        let path = out_dir.join(TRACE_FILE);
        output::write_file(&path, |w| output::write_trace_csv(&trace, w))?;
        Some(path)
    } else {
        None
    };
    Ok(SimulateOutcome {
        report,
        trials_csv,
        summary_json,
        trace_csv,
    })
}

/// Gradient check at random feasible UAV positions of the configured scene.
pub fn check_grad(
    config: &ExperimentConfig,
    num_points: usize,
    fd_step: f64,
    seed: u64,
    tx_power_dbm: f64,
) -> Result<GradCheckReport, Error> {
    config.validate()?;
    let setup = config.trial_setup()?;
    let radio = setup.radio.with_tx_power_dbm(tx_power_dbm);
    gradcheck::check_gradients(&setup.scene, &radio, num_points, fd_step, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldOptions {
    pub tx_power_dbm: f64,
    pub trial_index: u64,
    pub noiseless: bool,
}

/// The step-1 likelihood field of one trial (random phases, UAV at its
/// initial position), written as `x,y,L` to `out`.
pub fn field(config: &ExperimentConfig, out: &Path, opts: FieldOptions, execution: Execution) -> Result<LikelihoodField, Error> {
    config.validate()?;
    let mut setup = config.trial_setup()?;
    if opts.noiseless {
        setup.radio = setup.radio.noiseless();
    }
    let seed = experiment::trial_seed(config.plan.base_seed, opts.trial_index);
    let (phases, signal) = experiment::rough_observation(&setup, opts.tx_power_dbm, seed)?;
    let radio = setup.radio.with_tx_power_dbm(opts.tx_power_dbm);
    let field = match execution {
        Execution::Parallel => parallel::grid_search_mle(&signal.y, &setup.grid, &setup.scene, &radio, &phases)?,
        Execution::Sequential => {
            irsloc_core::estimation::grid_search_mle(&signal.y, &setup.grid, &setup.scene, &radio, &phases)?
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    output::write_file(out, |w| output::write_field_csv(&field, w))?;
    Ok(field)
}
