//! Simulation and analysis of the Quermass germ-grain Gibbs model.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod percolation;
pub mod sampler;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
