//! Error types shared across the crate.
//!
//! Every fallible public operation returns [`Result`].  Errors are split by
//! what went wrong rather than where: malformed textual input
//! ([`Error::Parse`]), dimension/shape disagreements ([`Error::Shape`]),
//! arithmetic that leaves the scalar ring ([`Error::DivisionByZero`],
//! [`Error::ExponentialDivisor`], [`Error::Singular`]), operations applied
//! outside their domain ([`Error::DegreeZeroInterior`],
//! [`Error::Unsupported`]), and structures that fail their defining
//! equations at validation time ([`Error::Invalid`]).

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Textual input could not be parsed.  `line` and `col` are 1-based and
    /// point at the offending token.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        /// 1-based line of the offending token.
        line: usize,
        /// 1-based column of the offending token.
        col: usize,
        /// Human-readable description of the problem.
        msg: String,
    },

    /// Two objects that must live over the same bundle or have compatible
    /// dimensions do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Division by the zero scalar.
    #[error("division by zero scalar")]
    DivisionByZero,

    /// Division (or inversion) where the divisor carries exponential bands;
    /// only exponential-free scalars are invertible in the ring.
    #[error("divisor has an exponential part; only exponential-free scalars can divide")]
    ExponentialDivisor,

    /// A matrix inversion or linear solve met a non-invertible matrix.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Interior product applied to a degree-0 alternating tensor.
    #[error("interior product is undefined on degree-0 tensors")]
    DegreeZeroInterior,

    /// A structure failed its defining equations at validation time.  The
    /// message names the first failing identity and where it fails.
    #[error("structure validation failed: {0}")]
    Invalid(String),

    /// A well-formed request the library deliberately does not serve.
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
