use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum LbsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    /// A coefficient vector mapped to a non-positive (or non-finite) θᵢ or αᵢ.
    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unavailable: {0}")]
    Unavailable(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LbsError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LbsError::Convergence(_) => 3,
            LbsError::Io(_) | LbsError::Csv(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, LbsError>;
