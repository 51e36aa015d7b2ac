use std::fmt;
use std::path::Path;

use drp_core::Error;

/// A failed invocation and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, configuration or input files.
    Usage(String),
    /// The computation itself broke down.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Failure::Usage(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Instability { .. }
            | Error::NotStationary { .. }
            | Error::QuadratureNotConverged(_)
            | Error::SingularSystem
            | Error::DegenerateFamily
            | Error::Unresolved(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;
