use std::fmt;
use std::process::ExitCode;

/// Failure of a command, classified for the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad or missing arguments, or an unreadable config file.
    Usage(String),
    Lib(lrmg::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use lrmg::Error as E;
        ExitCode::from(match self {
            CliError::Usage(_) => 2,
            CliError::Lib(E::Parameter(_) | E::FilterMisuse(_)) => 2,
            CliError::Lib(E::Numerical(_)) => 4,
            CliError::Lib(_) | CliError::Io(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Lib(e) => e.fmt(f),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lrmg::Error> for CliError {
    fn from(e: lrmg::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a file path to library and I/O errors.
pub fn with_path<T>(path: &str, r: lrmg::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        lrmg::Error::Io(io) => CliError::Io(std::io::Error::new(io.kind(), format!("{path}: {io}"))),
        lrmg::Error::Parse { line, msg } => CliError::Lib(lrmg::Error::Parse {
            line,
            msg: format!("{path}: {msg}"),
        }),
        other => CliError::Lib(other),
    })
}
