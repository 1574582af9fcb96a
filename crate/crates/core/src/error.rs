use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polytope is empty (LP phase one could not reach feasibility)")]
    Infeasible,

    #[error(
        "LP iteration limit exceeded after {iterations} pivots \
         ({rows} rows, {cols} columns, phase {phase})"
    )]
    LpIterationLimit {
        iterations: usize,
        rows: usize,
        cols: usize,
        phase: u8,
    },

    #[error("LP is unbounded")]
    Unbounded,

    #[error("{what} did not converge within {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is numerically singular at x = {point:?}")]
    Singular { point: Vec<f64> },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("grid oracle budget exceeded: {evaluations} evaluations > {budget}; use smaller n or larger spacing")]
    GridBudget { evaluations: u64, budget: u64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
