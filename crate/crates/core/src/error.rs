use alloc::string::String;

/// Errors raised by graph constructions, oracles and samplers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matching is not perfect: {unmatched} vertices unmatched")]
    NotPerfect { unmatched: usize },
    #[error("size limit exceeded: {what} is {size}, limit {limit}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("every outcome has zero weight; the target distribution is undefined")]
    ZeroNormalizer,
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("no perfect state after {attempts} retries")]
    RetryBudgetExceeded { attempts: u64 },
    #[error("no perfect matching after {draws} consecutive draws")]
    RejectionBudgetExceeded { draws: u64 },
    #[error("hole weight annealing diverged at stage {stage}: estimate {value:e} outside [{lower:e}, {upper:e}]")]
    AnnealDiverged {
        stage: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("oracle routes disagree: {0}")]
    OracleMismatch(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
