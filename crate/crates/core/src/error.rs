use std::path::PathBuf;

use thiserror::Error;

use crate::Vertex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: no edges or vertices found")]
    EmptyInput(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("brute-force optimum refused for n = {n}: the cap is n <= {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("vertex {vertex} is unclustered (label {label})")]
    Incomplete { vertex: Vertex, label: u32 },

    #[error(
        "vertex {waiter} waited more than {seconds:.1}s on vertex {blocker}; suspected deadlock"
    )]
    DeadlockSuspected {
        waiter: Vertex,
        blocker: Vertex,
        seconds: f64,
    },

    #[error("run aborted after a failure in another worker")]
    Aborted,

    #[error("reference objective is zero but candidate objective is {candidate}")]
    ZeroReference { candidate: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
