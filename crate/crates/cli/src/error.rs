use std::fmt;

use fva_core::PricingError;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag or input value (exit 2).
    Usage { flag: String, message: String },
    /// The pricer rejected its inputs (exit 2) or failed to converge (exit 3).
    Pricing { flag: Option<String>, error: PricingError },
    /// A calibration check is outside its tolerance (exit 4).
    Tolerance(String),
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            flag: flag.to_string(),
            message: message.into(),
        }
    }

    /// Attaches the flag responsible for a validation error.
    pub fn pricing_at(flag: &str, error: PricingError) -> Self {
        CliError::Pricing {
            flag: Some(flag.to_string()),
            error,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Pricing { error, .. } => match error {
                PricingError::NoConvergence { .. } | PricingError::PsorDiverged { .. } => 3,
                _ => 2,
            },
            CliError::Tolerance(_) => 4,
        }
    }
}

impl From<PricingError> for CliError {
    fn from(error: PricingError) -> Self {
        CliError::Pricing { flag: None, error }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage { flag, message } => write!(f, "{flag}: {message}"),
            CliError::Pricing { flag: Some(flag), error } => write!(f, "{flag}: {error}"),
            CliError::Pricing { flag: None, error } => write!(f, "{error}"),
            CliError::Tolerance(msg) => write!(f, "tolerance breach: {msg}"),
        }
    }
}
