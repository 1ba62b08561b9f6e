use thiserror::Error;

use crate::pda::ValidationReport;

/// Errors raised while reading or checking a placement delivery array.
#[derive(Debug, Error)]
pub enum PdaError {
    /// The text or grid could not be read as an F×K array.
    #[error("malformed PDA: {0}")]
    Malformed(String),
    /// The grid is well formed but violates one or more PDA conditions.
    #[error("invalid PDA: {0}")]
    Invalid(ValidationReport),
    #[error("invalid construction parameters: {0}")]
    Parameters(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),
}

/// Errors raised by the retrieval protocol and its components.
#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("demand {demand} of user {user} is outside [0:{max}]")]
    DemandOutOfRange {
        user: usize,
        demand: usize,
        max: usize,
    },
    #[error("malformed query from user {user} to server {server}: {reason}")]
    MalformedQuery {
        user: usize,
        server: usize,
        reason: String,
    },
    #[error("missing broadcast: {0}")]
    MissingBroadcast(String),
    #[error("length mismatch: {0}")]
    Length(String),
    #[error(transparent)]
    Pda(#[from] PdaError),
}

/// Errors raised by the experiment harness.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("enumeration needs {needed} realizations, above the cap of {cap}; use Monte Carlo or empirical mode")]
    CapExceeded { needed: u128, cap: u64 },
    #[error("invalid experiment: {0}")]
    Plan(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown figure or table id `{0}`")]
    UnknownFigure(String),
    #[error("invalid parameters: {0}")]
    Parameters(String),
}
