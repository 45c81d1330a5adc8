use thiserror::Error;

/// Errors raised by every layer of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("vertex {vertex} has no outgoing edge")]
    NoOutgoingEdge { vertex: usize },

    #[error("outgoing weights of vertex {vertex} sum to {sum}, expected 1")]
    NotStochastic { vertex: usize, sum: f64 },

    #[error("invalid vertex index {index} (network has {n} vertices)")]
    InvalidVertex { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain mismatch: [{a0}, {b0}] vs [{a1}, {b1}]")]
    DomainMismatch { a0: f64, b0: f64, a1: f64, b1: f64 },

    #[error("point {s} outside domain [{a}, {b}]")]
    OutOfDomain { s: f64, a: f64, b: f64 },

    #[error("degree {degree} exceeds cap {cap}; raise the degree cap or refine the input")]
    DegreeCap { degree: usize, cap: usize },

    #[error("invalid breakpoints: {0}")]
    Breakpoints(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("time {0} outside [0, 1]; use the long-time evolution")]
    TimeOutOfRange(f64),

    #[error("resolvent singular at {point} (distance to spectrum {distance:e}, rcond {rcond:e})")]
    Singular { point: f64, distance: f64, rcond: f64 },

    #[error("lambda must be nonzero for the dynamic Dirichlet operator")]
    ZeroLambda,

    #[error("horizon {0} is not a positive integer")]
    NonIntegerHorizon(f64),

    #[error("negative entry {value} in {what}")]
    Negative { what: String, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
