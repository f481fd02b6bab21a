use std::fmt;

/// Error classes, one per process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Input(String),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<discern_core::Error> for Failure {
    fn from(e: discern_core::Error) -> Self {
        match e {
            discern_core::Error::InvariantViolation(_) => Failure::Invariant(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
