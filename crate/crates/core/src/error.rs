use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),

    #[error("invalid lattice point ({x}, {y}): coordinates must be positive")]
    NonPositivePoint { x: u64, y: u64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("({p}, {q}) is not a primitive slope")]
    NotCoprime { p: i64, q: i64 },

    #[error("traces ({x}, {y}) do not define a cusped punctured torus: {reason}")]
    NotRealizable { x: f64, y: f64, reason: String },

    #[error("word {word} is peripheral or elliptic (|trace| = {trace})")]
    Peripheral { word: String, trace: f64 },

    #[error("word {0} is not primitive")]
    NotPrimitive(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("crossing enumeration did not stabilize: {0}")]
    Unstable(String),

    #[error("weights violate the threshold w(e) >= k + 2 = {required} on edge {edge} (weight {weight})")]
    Threshold {
        edge: String,
        weight: u64,
        required: u64,
    },

    #[error("invalid track: {0}")]
    InvalidTrack(String),

    #[error("track file line {line}: {message}")]
    TrackSyntax { line: usize, message: String },

    #[error("budget of {budget} exhausted: {what}")]
    Budget { what: String, budget: usize },

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
