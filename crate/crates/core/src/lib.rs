//! Samplers, exact enumerations and estimators for two-dimensional critical
//! lattice models and their conformally invariant scaling limits.

pub mod brownian;
pub mod cle;
pub mod error;
pub mod fractal;
pub mod geometry;
pub mod gff;
pub mod lattice;
pub mod loop_models;
pub mod percolation;
pub mod rng;
pub mod sle;
pub mod spin_fk;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{LoopPath, Point};
pub use rng::{Rng, RngStream};
pub use stats::EstimateWithCI;
