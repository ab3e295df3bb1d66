//! File formats.
//!
//! CSV files have one header row, a fixed column order and floats printed as
//! the shortest string that parses back to the same `f64`, in exponent form
//! below `1e-4` or from `1e16` up. The decimal point is always `.`.
//!
//! * trials: `scheme,power_dbm,trial,error_m,snr_db`, one row per trial and
//!   scheme in (power, scheme, trial) order; `snr_db` is the SNR at the true
//!   user under the final configuration.
//! * likelihood field: `x,y,L`, row-major with y outer.
//! * optimizer trace: `iteration,snr,x,y`, one row per UAV position visited,
//!   `snr` linear.
//! * summary JSON: `{"base_seed", "cells": [{"scheme", "power_dbm", "trials",
//!   "rmse_m", "avg_snr", "avg_snr_db", "snr_db_std"}]}`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use irsloc_core::experiment::MonteCarloReport;
use irsloc_core::{LikelihoodField, OptimTrace};
use serde::Serialize;

use crate::Error;

pub const TRIALS_HEADER: [&str; 5] = ["scheme", "power_dbm", "trial", "error_m", "snr_db"];
pub const FIELD_HEADER: [&str; 3] = ["x", "y", "L"];
pub const TRACE_HEADER: [&str; 4] = ["iteration", "snr", "x", "y"];

fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_trials_csv<W: Write>(report: &MonteCarloReport, w: W) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRIALS_HEADER)?;
    for t in report.records() {
        out.write_record([
            t.scheme.name().to_owned(),
            num(t.tx_power_dbm),
            t.trial_index.to_string(),
            num(t.position_error_m),
            num(t.final_snr_db()),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_field_csv<W: Write>(field: &LikelihoodField, w: W) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FIELD_HEADER)?;
    let n = field.grid.points_per_axis();
    for iy in 0..n {
        for ix in 0..n {
            let p = field.grid.point(ix, iy);
            out.write_record([num(p.x), num(p.y), num(field.values[iy * n + ix])])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(trace: &OptimTrace, w: W) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER)?;
    for (i, step) in trace.steps.iter().enumerate() {
        out.write_record([i.to_string(), num(step.snr), num(step.position.x), num(step.position.y)])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SummaryDoc<'a> {
    base_seed: u64,
    cells: Vec<CellDoc<'a>>,
}

#[derive(Debug, Serialize)]
struct CellDoc<'a> {
    scheme: &'a str,
    power_dbm: f64,
    trials: usize,
    rmse_m: f64,
    avg_snr: f64,
    avg_snr_db: f64,
    snr_db_std: f64,
}

pub fn summary_json(report: &MonteCarloReport) -> String {
    let doc = SummaryDoc {
        base_seed: report.base_seed,
        cells: report
            .cells
            .iter()
            .map(|c| CellDoc {
                scheme: c.scheme.name(),
                power_dbm: c.tx_power_dbm,
                trials: c.num_trials,
                rmse_m: c.rmse_m,
                avg_snr: c.avg_snr_linear,
                avg_snr_db: c.avg_snr_db,
                snr_db_std: c.snr_db_std,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
    s.push('\n');
    s
}

/// Human-readable per-cell table, SNR in dB.
pub fn summary_table(report: &MonteCarloReport) -> String {
    let mut s = format!(
        "{:<14} {:>9} {:>7} {:>11} {:>13} {:>11}\n",
        "scheme", "power_dBm", "trials", "rmse_m", "avg_snr_dB", "std_dB"
    );
    for c in &report.cells {
        s.push_str(&format!(
            "{:<14} {:>9} {:>7} {:>11.5} {:>13.3} {:>11.3}\n",
            c.scheme.name(),
            c.tx_power_dbm,
            c.num_trials,
            c.rmse_m,
            c.avg_snr_db,
            c.snr_db_std
        ));
    }
    s
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<(), Error>) -> Result<(), Error> {
    let io_err = |source: io::Error| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w)?;
    w.flush().map_err(io_err)
}
