//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("term {term} is not uniform: {reason}")]
    NotUniform { term: usize, reason: String },

    #[error("non-uniform state: {0}")]
    NonUniformState(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("iterative solver did not converge: {0}")]
    Convergence(String),

    #[error("projector annihilates the subset state on term {term} (all strings bad)")]
    Annihilation { term: usize },

    #[error("search frontier exceeded the memory cap of {cap} states")]
    FrontierCap { cap: usize },

    #[error("state space too large: {0}")]
    TooLarge(String),

    #[error("terms {i} and {j} do not commute")]
    NonCommuting { i: usize, j: usize },

    #[error("epsilon must lie in (0, 1], got {0}")]
    EpsilonRange(f64),

    #[error("path reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("circuit error: {0}")]
    Circuit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
