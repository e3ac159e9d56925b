use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sequence must contain at least one sign")]
    EmptySequence,

    #[error("length {len} exceeds the enumeration bound {max}")]
    LengthTooLarge { len: usize, max: usize },

    #[error("invalid sign character {found:?} at position {position}")]
    InvalidSign { position: usize, found: char },

    #[error("value {value} at position {position} is not ±1")]
    NotASign { position: usize, value: i8 },

    #[error("malformed binary sequence: {0}")]
    MalformedBinary(String),

    #[error("vector has zero or non-finite norm")]
    DegenerateVector,

    #[error("axes are colinear (|a·b| = {dot})")]
    ColinearAxes { dot: f64 },

    #[error("probability parameter {0} lies outside [-1, 1]")]
    InvalidProbability(f64),

    #[error("hidden-variable state is missing")]
    MissingHiddenState,

    #[error("protocol ordering violation: {0}")]
    OrderingViolation(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
