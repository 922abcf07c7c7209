use thiserror::Error;

/// Errors surfaced by the numerical routines and design solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the physically or mathematically valid domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root bracket does not enclose a sign change.
    #[error("bracket [{lo}, {hi}] does not enclose a sign change")]
    Bracket { lo: f64, hi: f64 },

    /// Adaptive refinement exhausted its subdivision budget before reaching
    /// the requested tolerance.
    #[error("failed to converge: {0}")]
    NonConvergence(String),

    /// A linear program has no feasible point.
    #[error("linear program infeasible")]
    Infeasible,

    /// A linear program is unbounded below. Valid inputs in this codebase
    /// never produce this; it indicates a malformed problem.
    #[error("linear program unbounded")]
    Unbounded,
}

pub type Result<T> = std::result::Result<T, Error>;
