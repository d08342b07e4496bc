use thiserror::Error;

use crate::score::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown control id `{0}`")]
    UnknownControl(String),

    #[error("invalid note sequence: {}", join_violations(.0))]
    InvalidSequence(Vec<Violation>),

    #[error("{what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("no audible harmonics: f0 {f0} Hz is above the Nyquist frequency")]
    NoAudibleHarmonics { f0: f64 },

    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),

    #[error("impulse response must have {expected} samples, got {got}")]
    ImpulseResponseLength { expected: usize, got: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// True for errors caused by input that parsed but failed semantic checks.
    pub fn is_semantic(&self) -> bool {
        matches!(
            self,
            Error::InvalidSequence(_)
                | Error::LengthMismatch { .. }
                | Error::NoAudibleHarmonics { .. }
                | Error::InvalidParams(_)
                | Error::ImpulseResponseLength { .. }
                | Error::UndefinedCorrelation(_)
        )
    }
}
