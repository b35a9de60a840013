use rhibe::SchemeError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("identity is revoked at this epoch")]
    Revoked,
    #[error("ciphertext does not match the decryption key's identity or epoch")]
    Mismatch,
    #[error("artifact is corrupt or inconsistent: {0}")]
    Integrity(String),
    #[error("operation violates workspace state: {0}")]
    StateViolation(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Taxonomy bucket; also the stable string in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::MissingArtifact(_) => "missing-artifact",
            Error::Revoked => "revoked",
            Error::Mismatch => "mismatch",
            Error::Integrity(_) | Error::Io(_) => "integrity",
            Error::StateViolation(_) => "state-violation",
        }
    }

    /// 2 usage or missing input, 3 revoked or non-matching key, 4 corrupt
    /// data, 5 state-ordering violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::MissingArtifact(_) => 2,
            Error::Revoked | Error::Mismatch => 3,
            Error::Integrity(_) | Error::Io(_) => 4,
            Error::StateViolation(_) => 5,
        }
    }
}

impl From<rhibe::mlgroup::GroupError> for Error {
    fn from(e: rhibe::mlgroup::GroupError) -> Self {
        Error::Integrity(e.to_string())
    }
}

impl From<SchemeError> for Error {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::Revoked => Error::Revoked,
            SchemeError::Mismatch => Error::Mismatch,
            SchemeError::StaleEpoch { .. }
            | SchemeError::EpochMismatch { .. }
            | SchemeError::DuplicateChild(_)
            | SchemeError::IndexExhausted(_)
            | SchemeError::UnknownChild(_) => Error::StateViolation(e.to_string()),
            SchemeError::DepthOutOfRange(..) | SchemeError::PrefixMismatch => {
                Error::Usage(e.to_string())
            }
            other => Error::Integrity(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
