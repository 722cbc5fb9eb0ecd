use thiserror::Error;

use crate::model::ProfileMismatch;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    Params(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("invalid set descriptor: {0}")]
    Descriptor(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("series error: {0}")]
    Jet(String),

    #[error("target set is not symmetric: {0}")]
    NotSymmetric(Box<ProfileMismatch>),

    #[error("state space has {size} states, above the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("quadrature did not converge: estimated error {estimate:e} above {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("invalid simulation config: {0}")]
    SimConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
