use thiserror::Error;

/// Errors raised by the magnitude library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagnitudeError {
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("wrong number of points: expected {expected}, got {got}")]
    WrongSize { expected: usize, got: usize },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("sampling exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("similarity matrix is numerically singular at t = {t}")]
    Singular { t: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("generator exhaustion: found {found} of {needed} edge lengths below the exactness threshold")]
    Exhaustion { found: usize, needed: usize },

    #[error("multiplicity error at exponent {exponent}: coefficient {coefficient} is not a negative even integer")]
    Multiplicity { exponent: String, coefficient: String },

    #[error("strict virtual triangle inequality violated: {0}")]
    SvtiViolation(String),

    #[error("ambiguous coefficient split at exponent {0}")]
    Ambiguity(String),

    #[error("inconsistent data: {0}")]
    Inconsistency(String),

    #[error("could not resolve the opposite-sum case: {0}")]
    CaseResolution(String),

    #[error("undecided: {0}")]
    Undecided(String),

    #[error("no candidate matches the supplied data: {0}")]
    Mismatch(String),

    #[error("extraction did not converge: {0}")]
    NonConvergence(String),

    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl MagnitudeError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        MagnitudeError::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for MagnitudeError {
    fn from(e: std::io::Error) -> Self {
        MagnitudeError::Io(e.to_string())
    }
}

pub type Result<T, E = MagnitudeError> = std::result::Result<T, E>;
