use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Capacity(_) => 4,
        }
    }
}

impl From<softkey::Error> for CliError {
    fn from(e: softkey::Error) -> Self {
        match e {
            softkey::Error::ParameterDomain(_) | softkey::Error::InvalidThresholds { .. } => {
                CliError::Config(e.to_string())
            }
            softkey::Error::UndefinedConditional(..) => CliError::Numerical(e.to_string()),
            softkey::Error::Capacity(msg) => CliError::Capacity(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
