use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("membership of point {point} in concept {concept} is unresolved at precision {precision}")]
    UndecidedMembership { point: String, concept: usize, precision: usize },

    #[error("no consistent hypothesis among the first {prefix_len} concepts")]
    NoConsistentHypothesis { prefix_len: usize },

    #[error("could not approximate hyperplane within tolerance (achieved mass estimate {achieved})")]
    Approximation { achieved: f64 },

    #[error("membership unresolved at precision {precision} for a source without a finite description")]
    Precision { precision: usize },

    #[error("concept {0} has no effective membership oracle")]
    NotEffective(usize),

    #[error("stage {stage} exceeds horizon {horizon}")]
    HorizonExceeded { stage: usize, horizon: usize },
}
