use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. Indices in messages are 1-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} at position {position} is outside the alphabet 1..={n_symbols}")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        n_symbols: usize,
    },
    #[error("observation sequence is empty")]
    EmptySequence,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate posterior: the sequence has zero probability under the model")]
    DegeneratePosterior,
    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("degenerate range for attribute {attribute}: min = max = {value}")]
    DegenerateRange { attribute: String, value: f64 },
    #[error("degenerate box: width {width}, height {height}")]
    DegenerateBox { width: f64, height: f64 },
    #[error("{frames} frame(s) given; at least 2 are required")]
    TooFewFrames { frames: usize },
    #[error("unsamplable model: state {state} after symbol {symbol} leaves no symbol with positive weight")]
    Unsamplable { state: usize, symbol: usize },
    #[error("enumeration guard exceeded: {paths} paths (limit {limit})")]
    GuardExceeded { paths: f64, limit: f64 },
    #[error("class {0:?} has no training sequences")]
    EmptyClass(String),
    #[error("a classifier needs at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("no training sequences")]
    NoSequences,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid class label: {0}")]
    InvalidLabel(String),
    /// Another error tagged with where in the input it happened.
    #[error("{context}: {source}")]
    At {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The innermost error, looking through [`Error::At`].
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }
}
