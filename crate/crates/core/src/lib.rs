//! Near-field localization with a UAV-mounted intelligent reflecting surface.
//!
//! The crate models a single-antenna user whose direct path to a multi-antenna
//! base station is blocked, so the only usable path is the one reflected by an
//! IRS carried on a UAV. It provides
//!
//! * [`geometry`]: reference points, uniform linear array layouts, exact
//!   element-to-antenna distances and the projection onto the UAV's feasible disk;
//! * [`channel`]: the spherical-wavefront line-of-sight channel, receiving SNR and
//!   seeded sampling of the received pilot;
//! * [`estimation`]: exhaustive grid-search maximum-likelihood localization;
//! * [`optimization`]: projected gradient ascent on the UAV position, the
//!   closed-form centroid phase rule and the alternating joint optimizer;
//! * [`experiment`]: the three-step localization pipeline and the paired-seed
//!   Monte Carlo scheme comparison.
//!
//! Everything here is `no_std` (with `alloc`) and deterministic given a seed.
//! File formats, parallel execution and the command line live in the `irsloc`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod channel;
pub mod error;
pub mod estimation;
pub mod experiment;
pub mod geometry;
pub mod math;
pub mod optimization;

pub use channel::{LosChannel, PhaseProfile, RadioConfig, ReceivedSignal};
pub use error::Error;
pub use estimation::{GridSpec, LikelihoodField};
pub use experiment::{MonteCarloReport, SchemeId, TrialRecord};
pub use geometry::{ArrayLayout, Centering, Position3, SceneGeometry};
pub use optimization::{Backtracking, OptimConfig, OptimTrace};

/// Complex baseband sample type used throughout the crate.
pub type Complex = num_complex::Complex<f64>;

pub type Result<T, E = Error> = core::result::Result<T, E>;
