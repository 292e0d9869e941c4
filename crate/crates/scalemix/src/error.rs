//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("epsilon must lie in [0, 0.5), got {0}")]
    EpsilonOutOfRange(f64),

    #[error("sigma must be positive and finite, got {0}")]
    SigmaOutOfRange(f64),

    #[error("beta must lie strictly in (0, 1), got {0}")]
    BetaOutOfRange(f64),

    #[error("gamma must be positive and finite, got {0}")]
    GammaOutOfRange(f64),

    #[error("n^(-gamma) = {shrink} >= 1 at n = {n}: sigma = 1 - n^(-gamma) would not be positive")]
    DegenerateNearOne { n: usize, shrink: f64 },

    #[error("resolved epsilon = {epsilon} >= 0.5 at n = {n}; increase n or beta")]
    EpsilonResolvedTooLarge { n: usize, epsilon: f64 },

    #[error("the likelihood ratio needs an alternative with epsilon > 0 and sigma != 1")]
    DegenerateLikelihoodRatio,

    #[error("sample must contain at least one observation")]
    EmptySample,

    #[error("null calibration needs at least {min} replicates, got {got}")]
    TooFewReplicates { got: usize, min: usize },

    #[error("calibration table does not match the request: {0}")]
    CalibrationMismatch(String),

    #[error("{test} requires a Monte Carlo null calibration; none was supplied")]
    MissingCalibration { test: &'static str },

    #[error("{test} has a closed-form null; a Monte Carlo calibration does not apply")]
    UnexpectedCalibration { test: &'static str },

    #[error("{what} failed to converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid scenario configuration: {0}")]
    InvalidScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach path context to an I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
