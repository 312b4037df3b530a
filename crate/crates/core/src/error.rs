//! Error and result types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by parsing, cleaning, simulation, and optimization.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed GraphML or CSV input, with source position when known.
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    /// Structurally invalid graph data (duplicate ids, dangling edge endpoints).
    #[error("structural error: {0}")]
    Structure(String),

    /// A feature name that does not exist in the table.
    #[error("unknown feature: {0:?}")]
    UnknownFeature(String),

    /// Cleaning pipeline failure (residual nulls, empty graph).
    #[error("cleaning error: {0}")]
    Cleaning(String),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A caller-side contract violation (mismatched dimensions, empty inputs).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Objective evaluation failed inside an optimization run.
    #[error("objective evaluation failed at trial {trial}: {source}")]
    Objective {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
