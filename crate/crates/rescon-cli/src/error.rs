use std::fmt;

/// CLI-level failures, mapped to process exit codes: validation and I/O
/// problems exit 2, numerical failures (ill-conditioning, singular bases,
/// broken self-checks) exit 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Core(rescon::Error),
    Io(std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(e) => {
                if e.is_numerical() {
                    3
                } else {
                    2
                }
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid input: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<rescon::Error> for CliError {
    fn from(e: rescon::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
