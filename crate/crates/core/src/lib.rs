//! Catalan percolation toolkit: Monte Carlo simulation of the model on
//! finite windows, exact generating-function lower bounds on the critical
//! parameter, enhanced oriented percolation with its edge-speed and
//! box-crossing estimators, and the couplings tying the models together.

pub mod bits;
pub mod catalan;
pub mod couplings;
pub mod error;
pub mod harness;
pub mod oriented;
pub mod par;
pub mod poly;
pub mod report;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
pub use par::Parallelism;
