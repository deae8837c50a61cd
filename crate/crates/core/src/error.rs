use thiserror::Error;

use crate::alignment::MultipleAlignment;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pattern has no symbols")]
    EmptyPattern,
    #[error("malformed token {0:?}")]
    MalformedToken(String),
    #[error("no cost defined for token {0:?}")]
    UnknownToken(String),
    #[error("frequency must be at least 1, got {0}")]
    BadFrequency(i64),
    #[error("duplicate pattern id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pattern {0:?} is not in the grammar")]
    UnknownPattern(String),
    #[error("alignment invariant violated: {0}")]
    InvariantViolation(String),
    #[error("best alignment leaves part of the input unmatched")]
    IncompleteCoverage(Box<MultipleAlignment>),
    #[error("no alignment accounts for the whole code")]
    UnknownCode,
    #[error("code decodes to more than one surface sequence")]
    DecodeAmbiguous,
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
