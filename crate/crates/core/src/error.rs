use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {kind} `{name}` (available: {})", available.join(", "))]
    NotFound {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("inadmissible step for {flow}: effective time {tau} has negative real part")]
    InadmissibleStep { flow: &'static str, tau: String },

    #[error("{flow} flow produced non-finite values at internal step {step}")]
    BlowUp { flow: &'static str, step: usize },

    #[error("scheme `{scheme}` has complex coefficients and is not stable on the {backend} backend")]
    StabilityGuard { scheme: String, backend: &'static str },

    #[error("backend incompatibility: {0}")]
    BackendIncompatible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precision not reached: achieved {achieved:e}, requested {requested:e}")]
    Precision { achieved: f64, requested: f64 },

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error("configuration error for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Process exit status groups used by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Configuration,
    Numerical,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Configuration => 2,
            ExitKind::Numerical => 3,
        }
    }
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl fmt::Display) -> Self {
        Error::Config {
            key: key.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_kind(&self) -> ExitKind {
        match self {
            Error::BlowUp { .. } | Error::Precision { .. } | Error::Evaluation(_) => {
                ExitKind::Numerical
            }
            _ => ExitKind::Configuration,
        }
    }
}
