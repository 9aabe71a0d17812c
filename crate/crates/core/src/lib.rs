//! Random tries and patricia tries built from memoryless sources.
//!
//! The crate builds tries and patricia tries, evaluates additive functionals
//! on them, computes the asymptotic constants governing their fringe-tree
//! statistics and independence number, and checks those constants against
//! exhaustive enumeration and seeded Monte Carlo simulation.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod functionals;
pub mod rng;
pub mod simulation;
pub mod source;
pub mod trees;

pub use error::{Error, Result};
pub use source::SourceDistribution;
