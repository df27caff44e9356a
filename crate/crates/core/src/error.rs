// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Every failure the library can report.
///
/// The CLI maps these onto exit codes via [`ParampError::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParampError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reduced coupling rho = {rho} is outside the stable range [0, 1)")]
    StabilityViolation { rho: f64 },

    #[error("pump frequency {pump} rad/s is not at the degenerate operating point {expected} rad/s")]
    UnsupportedDetuning { pump: f64, expected: f64 },

    #[error("idler frequency {idler} rad/s is not positive")]
    NegativeIdler { idler: f64 },

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, history: Vec<f64> },

    #[error("undepleted coupling rho0 = {rho0} is at or above the oscillation threshold")]
    AboveThreshold { rho0: f64 },

    #[error("gain never dropped by the requested amount inside the swept window")]
    NotCompressed,

    #[error("multi-start search gave inconsistent root counts across refinement levels")]
    SolverExhausted,

    #[error("oscillation threshold could not be bracketed: {0}")]
    Inconclusive(String),

    #[error("steady state cannot be rotated onto real amplitudes (imaginary residue {residue:e})")]
    PhaseConventionUnavailable { residue: f64 },

    #[error("drift matrix is not strictly stable (largest real part of -A is {max_real:e})")]
    MarginallyStable { max_real: f64 },

    #[error("phase-space grid captures only {mass} of the probability mass")]
    GridTooNarrow { mass: f64 },

    #[error("trajectory {trajectory} diverged at t = {time:e} s (|amplitude| = {amplitude:e})")]
    StepInstability { trajectory: usize, time: f64, amplitude: f64 },

    #[error("only {available} samples available, at least {required} needed")]
    InsufficientSamples { available: usize, required: usize },

    #[error("drive admits three Duffing branches, |alpha|^2 = {photon_numbers:?}")]
    BistableDrive { photon_numbers: Vec<f64> },

    #[error("flux bias is too close to half a flux quantum (|cos| = {cos_value})")]
    FluxNearHalfQuantum { cos_value: f64 },

    #[error("no pump detuning satisfies the resonance conditions: {0}")]
    NoMatching(String),

    #[error("{failed} of {total} points failed (flagged in the status column)")]
    PartialFailure { failed: usize, total: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl ParampError {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            ParampError::Config(_) | ParampError::InvalidParameter(_) => 2,
            ParampError::Io(_) => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for ParampError {
    fn from(e: std::io::Error) -> Self {
        ParampError::Io(e.to_string())
    }
}

impl From<csv::Error> for ParampError {
    fn from(e: csv::Error) -> Self {
        ParampError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ParampError>;
