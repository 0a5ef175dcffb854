//! Error types shared across modules.

use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid input:\n{0}")]
    Invalid(ValidationReport),
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Grouping(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// An offload profile outside the box `0 <= x_n <= min(S_n, phi_n * B_n)`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("infeasible offload x[{}] = {value} outside [0, {cap}]", .index + 1)]
pub struct Infeasible {
    /// 0-based APO index.
    pub index: usize,
    pub value: f64,
    pub cap: f64,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{what} did not converge after {iters} iterations (residual {residual:e}); last iterate {last:?}")]
    NotConverged { what: &'static str, iters: usize, residual: f64, last: Vec<f64> },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{op} needs exactly {expected} APO(s), scenario has {got}")]
    WrongSize { op: &'static str, expected: usize, got: usize },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error(transparent)]
    Infeasible(#[from] Infeasible),
    #[error(transparent)]
    Model(#[from] ModelError),
}
