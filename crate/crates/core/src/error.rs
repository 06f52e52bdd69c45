use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid assortment: {0}")]
    InvalidAssortment(String),

    #[error("invalid utility for item {item}: {value}")]
    InvalidUtility { item: usize, value: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("non-finite optimizer input: {0}")]
    NonFinite(String),

    #[error("brute-force enumeration refused for {n} items (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
