use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported surface: {0}")]
    UnsupportedSurface(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid site {index}: {reason}")]
    InvalidSite { index: usize, reason: String },
    #[error("incomplete termination: no rule for site class {class} (atom {atom})")]
    IncompleteTermination { class: String, atom: usize },
    #[error("termination conflict at atom {atom}: {reason}")]
    TerminationConflict { atom: usize, reason: String },
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Singularity(_) | Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
