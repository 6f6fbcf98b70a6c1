//! Small numeric building blocks shared by the estimation crates.
//!
//! Nothing here is specific to GMM: checked linear solves, PSD square roots,
//! deterministic RNG substreams and order statistics.

pub mod linalg;
pub mod rng;
pub mod stats;

pub use linalg::{LinalgError, MAX_CONDITION};
pub use nalgebra::{DMatrix, DVector};
