use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {0} of the constraint matrix is identically zero")]
    ZeroRow(usize),

    #[error("constraint matrix has column rank {rank} < {n}")]
    RankDeficient { rank: usize, n: usize },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("weighted Gram matrix is not positive definite (pivot {index} = {pivot:e}, floor {floor:e})")]
    NotPositiveDefinite { index: usize, pivot: f64, floor: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oracle did not reach tolerance within {0} iterations")]
    NoConvergence(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("instance generation failed after {0} rank-deficient attempts")]
    GenerationFailed(usize),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Short stable identifier for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroRow(_) => "zero_row",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Dimension(_) => "dimension",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::Domain(_) => "domain",
            Error::NoConvergence(_) => "no_convergence",
            Error::Parse { .. } => "parse",
            Error::GenerationFailed(_) => "generation_failed",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
