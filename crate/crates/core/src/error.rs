use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not regular: row {row} has no finite entry")]
    NotRegular { row: usize },

    #[error("matrix is reducible (precedence graph not strongly connected)")]
    Reducible,

    #[error("transient search exceeded its cap ({what} <= {cap})")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("invalid number `{0}`")]
    Number(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("index t{index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid constraint `{0}`")]
    Constraint(String),

    #[error("{field}: {msg}")]
    Model { field: String, msg: String },

    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
