use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{origin}: line {line}, column {column}: {msg}")]
    Config { origin: String, line: usize, column: usize, msg: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] acrcd_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
