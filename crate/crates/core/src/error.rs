//! Error type shared by the core modules.

use alloc::string::String;
use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Requested hours `[from, to)` are not covered by the data.
    Coverage {
        /// First missing hour.
        from: i64,
        /// One past the last missing hour.
        to: i64,
    },
    /// Windows or archives that cannot be compared.
    IncompatibleWindows(String),
    /// Operation needs a point forecast but got scenarios, or vice versa.
    WrongKind {
        /// Kind the operation needs.
        expected: &'static str,
    },
    /// Two forecast windows do not share any target hour.
    NoOverlap,
    /// A metric is undefined for the given input (e.g. horizon 1).
    UndefinedMetric(&'static str),
    /// Inputs of different length.
    SizeMismatch {
        /// Length of the left operand.
        left: usize,
        /// Length of the right operand.
        right: usize,
    },
    /// Correlation with a zero-variance input.
    UndefinedCorrelation,
    /// Value outside its mathematical domain.
    NumericDomain(&'static str),
    /// Invalid value or structure in a constructed object.
    Invalid(String),
    /// Invalid configuration.
    Config(String),
    /// Scoring period does not fit the scoring-month rule.
    Period(String),
    /// Requested commitment does not fit the solved horizon.
    Commitment {
        /// Requested commitment.
        requested: usize,
        /// Solved horizon.
        horizon: usize,
    },
    /// LP solver did not reach optimality.
    Solver(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Coverage { from, to } => write!(f, "data does not cover hours [{from}, {to})"),
            Error::IncompatibleWindows(msg) => write!(f, "incompatible forecast windows: {msg}"),
            Error::WrongKind { expected } => write!(f, "expected a {expected} forecast"),
            Error::NoOverlap => f.write_str("forecast windows do not overlap"),
            Error::UndefinedMetric(msg) => write!(f, "metric undefined: {msg}"),
            Error::SizeMismatch { left, right } => {
                write!(f, "size mismatch: {left} vs {right}")
            }
            Error::UndefinedCorrelation => f.write_str("correlation undefined for zero variance"),
            Error::NumericDomain(msg) => write!(f, "numeric domain error: {msg}"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Period(msg) => write!(f, "scoring period error: {msg}"),
            Error::Commitment { requested, horizon } => {
                write!(f, "commitment {requested} exceeds solved horizon {horizon}")
            }
            Error::Solver(msg) => write!(f, "solver failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
