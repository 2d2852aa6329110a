use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window length n = {n} (need n >= {min})")]
    InvalidWindow { n: usize, min: usize },

    #[error("probability out of range: {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("n = {n} is outside the exact range (max {max})")]
    OutOfExactRange { n: usize, max: usize },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("degenerate crossing region: {0}")]
    DegenerateRegion(String),

    #[error("region is not contained in the lattice window")]
    RegionOutsideWindow,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that should map to the CLI resource exit code.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::Infeasible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
