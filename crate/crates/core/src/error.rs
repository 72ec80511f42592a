use thiserror::Error;

/// Errors produced by the domain builders, solvers and the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("resolution too coarse: no interior node has all of its lattice neighbours inside the mask")]
    TooCoarse,

    #[error("mask is disconnected ({components} edge-connected components)")]
    Disconnected { components: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear solve failed: relative residual {residual:.3e} exceeds {bound:.1e}")]
    LinearSolve { residual: f64, bound: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("iteration cap of {iterations} reached at p = {p} (last relative change {change:.3e}, residual {residual:.3e})")]
    IterationCap {
        p: f64,
        iterations: usize,
        change: f64,
        residual: f64,
    },

    #[error("degenerate field: {0}")]
    DegenerateField(&'static str),

    #[error("quotient failed to decrease after maximal backtracking at p = {p}, iteration {iteration}")]
    NonDecrease { p: f64, iteration: usize },

    #[error("dual fields overflow at p = {p}")]
    DualOverflow { p: f64 },

    #[error("continuation failed at p = {p}: {source}")]
    Continuation {
        p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed data in {what}: {message}")]
    Format { what: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            message: message.into(),
        }
    }
}
