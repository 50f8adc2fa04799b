use thiserror::Error;

/// Errors raised by the descriptor-system toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("incompatible systems: {0}")]
    Incompatible(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("pole pencil A - λE is not regular")]
    NonRegular,

    #[error("evaluation at a pole (λ = {re} + {im}i)")]
    EvaluationAtPole { re: f64, im: f64 },

    #[error("degenerate bilinear map: ad - bc = 0")]
    DegenerateMap,

    #[error("improper or non-reduced realization: {0}")]
    Improper(String),

    #[error("rank decisions are inconsistent ({0}); try a different tolerance")]
    RankDecision(String),

    #[error("QZ iteration failed to converge after {0} iterations")]
    NoConvergence(usize),

    #[error("could not find non-pole frequency after {0} redraws")]
    NoFrequency(usize),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
