//! The unit Teissier distribution on (0, 1): density, moments of order
//! statistics, L-moments, a truncated-moment characterization, nine point
//! estimators, goodness-of-fit reporting and a Monte Carlo comparison harness.

pub mod charact;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod estimate;
pub mod gof;
pub mod moments;
pub mod numerics;
pub mod sample;
pub mod simulate;
pub mod specfun;

pub use dist::{Probability, UnitTeissier};
pub use error::{Error, Result};
pub use sample::Sample;
