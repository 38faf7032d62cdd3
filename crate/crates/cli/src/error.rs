use std::fmt;

/// Config problems exit with 2, failures while running with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Pipeline(String),
}

impl CliError {
    pub fn config(e: impl fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn pipeline(e: impl fmt::Display) -> Self {
        CliError::Pipeline(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Pipeline(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Pipeline(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qtunnel::Error> for CliError {
    fn from(e: qtunnel::Error) -> Self {
        CliError::pipeline(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::pipeline(e)
    }
}
