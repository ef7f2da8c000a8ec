//! Crate-wide error type with stable machine-readable codes.

use thiserror::Error;

/// Errors produced by the library. Every variant maps to a stable code via
/// [`Error::code`] so that command-line consumers can dispatch on failures
/// without parsing prose.
#[derive(Debug, Error)]
pub enum Error {
    /// An index exceeded the materialized range of a parameter family or grid.
    #[error("{what} = {got} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// Parameter positivity fails: `a_m(i) + b_n(j) <= 0` at the named indices.
    #[error("invalid parameters: a_{m}({i}) + b_{n}({j}) = {sum} is not positive")]
    InvalidParameters {
        m: usize,
        n: usize,
        i: usize,
        j: usize,
        sum: f64,
    },

    /// A function was evaluated outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series failed its summability check.
    #[error("divergent series: {0}")]
    Divergent(String),

    /// A numerical routine failed an internal consistency check; indicates a
    /// bug or a violated precondition, not a recoverable condition.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A simulated grid was too small for the requested observable.
    #[error("insufficient extent: {0}")]
    InsufficientExtent(String),

    /// A request would exceed the memory or work budget; the message names
    /// the cheaper alternative when one exists.
    #[error("resource limit: {0}")]
    Resource(String),

    /// An artifact could not be written or read.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable code for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "range",
            Error::InvalidParameters { .. } => "invalid-parameters",
            Error::Domain(_) => "domain",
            Error::Divergent(_) => "divergent",
            Error::Numerical(_) => "numerical",
            Error::InsufficientExtent(_) => "insufficient-extent",
            Error::Resource(_) => "resource",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
