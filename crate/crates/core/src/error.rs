use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quantum number {n} is not valid for {system}")]
    InvalidQuantumNumber { n: u32, system: &'static str },

    #[error("invalid level map: {0}")]
    InvalidLevelMap(String),

    #[error("deformation `{0}` is not implemented")]
    UnsupportedDeformation(String),

    #[error("basis of size {basis} is too small for level {n} (need at least {need})")]
    BasisTooSmall { n: u32, basis: usize, need: usize },

    #[error("mode coefficient sequences differ in length ({c} vs {c_prime})")]
    ModeLengthMismatch { c: usize, c_prime: usize },

    #[error("empty sweep range")]
    EmptyRange,

    #[error("correlation undefined: all four coincidence rates vanish")]
    UndefinedCorrelation,

    #[error("corrected pair rate is {ratio} times the unperturbed one; outside the first-order regime")]
    NonPerturbative { ratio: f64 },

    #[error("configuration failed validation:\n{0}")]
    Validation(String),

    #[error("malformed configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 4,
            Error::Io { .. } => 3,
            Error::Serialize(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
