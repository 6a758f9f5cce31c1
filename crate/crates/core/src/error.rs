use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric positive definite (non-positive pivot at factor index {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("matrix is singular (no pivot at step {step})")]
    Singular { step: usize },

    #[error("operator not coercive: K_FF is singular (no Dirichlet node and c0 = 0 on some component)")]
    NotCoercive,

    #[error("matched Schur block not SPD (pivot {pivot})")]
    MatchedSchurNotSpd { pivot: usize },

    #[error("{what} of size {size} exceeds the dense cap {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("eigenvalue computation did not converge")]
    EigenFailure,

    #[error("operator failed symmetry probe: |<Av,w> - <v,Aw>| = {defect:e}")]
    NotSymmetric { defect: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
