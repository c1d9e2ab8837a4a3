//! Crate-wide error type.

use core::fmt;

/// Errors surfaced by the arithmetic, ladder, simulator, and analysis layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Error {
    /// Inversion of zero was requested.
    NonInvertible,
    /// The point at infinity has no uncompressed encoding.
    NotEncodable,
    /// A public-key encoding failed validation.
    MalformedKey(&'static str),
    /// A hex string failed to parse into the expected fixed-width value.
    MalformedHex(&'static str),
    /// A scalar or point violated an operation's preconditions.
    InvalidInput(&'static str),
    /// A cycle configuration or report parameter was out of range.
    InvalidConfig(&'static str),
    /// Traces of different shapes or lengths were compared sample-wise.
    IncomparableTraces(&'static str),
    /// The requested result is the point at infinity.
    DegenerateKey,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonInvertible => write!(f, "zero has no inverse modulo p"),
            Error::NotEncodable => write!(f, "the point at infinity cannot be encoded"),
            Error::MalformedKey(why) => write!(f, "malformed public key: {why}"),
            Error::MalformedHex(why) => write!(f, "malformed hex input: {why}"),
            Error::InvalidInput(why) => write!(f, "invalid input: {why}"),
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
            Error::IncomparableTraces(why) => write!(f, "traces are not comparable: {why}"),
            Error::DegenerateKey => write!(f, "scalar multiple is the point at infinity"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
