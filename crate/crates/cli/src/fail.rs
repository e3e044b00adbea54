use std::fmt;

use fasep_core::Error;

/// A failure mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or arguments (exit 2).
    Spec(String),
    /// The dynamics did not end as requested (exit 3).
    Dynamics(String),
    /// Beyond the exact solver's limits (exit 4).
    Capacity(String),
    /// A verification check failed (exit 5).
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Dynamics(_) => 3,
            CliError::Capacity(_) => 4,
            CliError::Verification(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Spec(m) => ("invalid input", m),
            CliError::Dynamics(m) => ("dynamics", m),
            CliError::Capacity(m) => ("capacity", m),
            CliError::Verification(m) => ("verification failed", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::MaxEventsExceeded(_)
            | Error::StuckAtBoundary
            | Error::NoRecords { .. }
            | Error::BoundaryJam
            | Error::NotAbsorbing(_)
            | Error::Reducible(_)
            | Error::EmptyDistribution
            | Error::InsufficientSamples => CliError::Dynamics(msg),
            Error::TooLarge(_) | Error::Overflow(_) => CliError::Capacity(msg),
            _ => CliError::Spec(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Spec(format!("i/o: {e}"))
    }
}
