//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line} of {path}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trace too short: need {required_s:.3e} s from origin, have {available_s:.3e} s")]
    InsufficientTrace { required_s: f64, available_s: f64 },

    #[error("shape mismatch at layer {layer}: expected {expected}, got {got}")]
    Shape {
        layer: usize,
        expected: String,
        got: String,
    },

    #[error("reuse-key mismatch: {0}")]
    ReuseKey(String),

    #[error("missing prerequisite: {0}")]
    MissingPrerequisite(String),

    #[error("model coverage gap: uncovered dictionary indices {0:?}")]
    CoverageGap(Vec<usize>),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CoreError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
