use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] levy_ifpt_core::Error),
}

impl CliError {
    /// 2 for bad input or violated preconditions, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }
}
