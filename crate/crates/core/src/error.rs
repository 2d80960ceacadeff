use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hermite order {0} (must be >= -1)")]
    InvalidOrder(i32),

    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("aliasing: n_phi = {n_phi} must exceed 2*ell = {}", 2 * .ell)]
    Aliasing { n_phi: usize, ell: u32 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate map: {0}")]
    DegenerateMap(String),

    #[error("insufficient resolution: n_rings = {n_rings} < {required} required for ell = {ell}")]
    Resolution {
        n_rings: usize,
        required: usize,
        ell: u32,
    },

    #[error("experiment has no realizations")]
    EmptyExperiment,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("map format: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
