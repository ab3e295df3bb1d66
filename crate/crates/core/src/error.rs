use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("invalid array layout: {0}")]
    InvalidLayout(&'static str),
    /// Two points that must be separated coincide (a zero distance would
    /// divide the path loss or the gradient terms).
    #[error("degenerate geometry: {0} coincide")]
    Coincident(&'static str),
    #[error("UAV position is {distance} m from home, outside the feasible radius {r_max} m")]
    Infeasible { distance: f64, r_max: f64 },
    #[error("invalid radio configuration: {0}")]
    InvalidRadio(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid optimizer configuration: {0}")]
    InvalidOptim(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid experiment: {0}")]
    InvalidExperiment(&'static str),
}
