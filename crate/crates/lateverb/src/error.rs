use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("{path}:{line}: {msg}")]
    Scenario {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
