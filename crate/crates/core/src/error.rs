use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by policies, environments, the oracle and the experiment harness.
#[derive(Debug, Error)]
pub enum BanditError {
    #[error("empty candidate set")]
    EmptyCandidates,
    #[error("non-finite value")]
    NonFinite,
    #[error("invalid Beta shape (alpha={alpha}, beta={beta})")]
    InvalidBetaShape { alpha: f64, beta: f64 },
    #[error("non-binary reward {0}")]
    NonBinaryReward(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("arm {arm} out of range for {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },
    #[error("accumulator not positive definite")]
    AccumulatorNotPositiveDefinite,
    #[error("precision matrix not positive definite")]
    PrecisionNotPositiveDefinite,
    #[error("no data")]
    NoData,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl BanditError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        BanditError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 configuration, 3 runtime/numeric, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            BanditError::Config(_) | BanditError::InvalidParameter(_) => 2,
            BanditError::Io { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, BanditError>;
