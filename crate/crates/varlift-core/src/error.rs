//! Error type shared across the crate.

/// Everything that can go wrong while parsing, evaluating, or solving.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Syntax error in an expression string. `offset` is a byte offset into the input.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// An elementary function was evaluated outside its domain.
    #[error("domain error in {component}: {op} at {value}")]
    Domain {
        component: String,
        op: String,
        value: f64,
    },

    /// Dimension mismatch between user data and what an operation expects.
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },

    /// A computation produced NaN or infinity.
    #[error("non-finite value in {component}")]
    NonFinite { component: String },

    /// Whitney sum combination of states over different base points.
    #[error("base point mismatch at coordinate {index}: {left} vs {right}")]
    BaseMismatch { index: usize, left: f64, right: f64 },

    /// A section vanished where it must not (eigen-section checks).
    #[error("section vanishes at sample {index}; eigen quotient undefined")]
    ZeroSection { index: usize },

    /// Iterative solver ran out of iterations.
    #[error("no convergence after {iters} iterations (last residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },

    /// Newton-Kleinman could not find a stabilizing initial gain.
    #[error("failed to find a stabilizing initial guess after {doublings} doublings")]
    NotStabilizable { doublings: usize },

    /// An operation that requires zero input channels saw a nonzero one.
    #[error("operation requires no input channels: {detail}")]
    NonzeroInput { detail: String },

    /// Sampling produced no points.
    #[error("sample specification yields no points")]
    EmptySamples,

    /// Catch-all for invalid configuration.
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
