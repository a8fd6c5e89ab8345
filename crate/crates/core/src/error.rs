use thiserror::Error;

use crate::bath::BathError;
use crate::cce::CceError;
use crate::cli::ConfigError;
use crate::noise::NoiseError;
use crate::oracle::OracleError;
use crate::spinops::SpinError;

/// Crate-level error. Each module has its own error type; this wraps them so
/// orchestration code can use `?` across module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Bath(#[from] BathError),
    #[error(transparent)]
    Cce(#[from] CceError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 config error, 3 numerical non-convergence,
    /// 4 dimension overflow, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Spin(SpinError::UnsupportedSpin(_)) => 2,
            Error::Bath(BathError::EmptyAbundance(_)) | Error::Bath(BathError::UnknownIsotope { .. }) => 2,
            Error::Bath(BathError::Parse { .. }) => 2,
            Error::Cce(CceError::InsufficientDecay { .. }) | Error::Cce(CceError::FitDiverged(_)) => 3,
            Error::Noise(NoiseError::Quadrature { .. }) => 3,
            Error::Oracle(OracleError::DimensionOverflow { .. }) => 4,
            Error::Cce(CceError::DimensionOverflow { .. }) => 4,
            _ => 1,
        }
    }
}
