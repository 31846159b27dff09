use padic_tori::Error;
use serde::Serialize;

/// Machine-readable failure class; each maps to its own exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCode {
    Internal,
    ConfigInvalid,
    BudgetExceeded,
    PrecisionExhausted,
    Unsupported,
    NotAdmissible,
    NotInSpectrum,
    Io,
}

impl ErrorCode {
    /// 2 is left to the argument parser.
    pub fn exit_status(self) -> i32 {
        match self {
            ErrorCode::Internal => 1,
            ErrorCode::ConfigInvalid => 3,
            ErrorCode::BudgetExceeded => 4,
            ErrorCode::PrecisionExhausted => 5,
            ErrorCode::Unsupported => 6,
            ErrorCode::NotAdmissible => 7,
            ErrorCode::NotInSpectrum => 8,
            ErrorCode::Io => 9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { code: ErrorCode::ConfigInvalid, message }
    }

    pub fn io(message: String) -> Self {
        CliError { code: ErrorCode::Io, message }
    }

    /// Errors raised while validating a job are configuration errors whatever their kind.
    pub fn config_from(e: Error) -> Self {
        match e {
            Error::Unsupported(_) => e.into(),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) | Error::NotADivisor(..) | Error::NotAncestor(_) => ErrorCode::ConfigInvalid,
            Error::InsufficientPrecision(_) => ErrorCode::PrecisionExhausted,
            Error::BudgetExceeded(_) => ErrorCode::BudgetExceeded,
            Error::Unsupported(_) => ErrorCode::Unsupported,
            Error::NotAdmissible => ErrorCode::NotAdmissible,
            Error::NotInSpectrum(_) => ErrorCode::NotInSpectrum,
            Error::OutsideDomain(_) | Error::DivisionByZero => ErrorCode::Internal,
        };
        CliError { code, message: e.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_statuses_are_distinct() {
        use ErrorCode::*;
        let all = [Internal, ConfigInvalid, BudgetExceeded, PrecisionExhausted, Unsupported, NotAdmissible, NotInSpectrum, Io];
        let mut seen: Vec<i32> = all.iter().map(|c| c.exit_status()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), all.len());
        assert!(!seen.contains(&0) && !seen.contains(&2));
    }

    #[test]
    fn core_errors_map_to_codes() {
        assert_eq!(CliError::from(Error::BudgetExceeded("x".into())).code, ErrorCode::BudgetExceeded);
        assert_eq!(CliError::from(Error::InsufficientPrecision("x".into())).code, ErrorCode::PrecisionExhausted);
        assert_eq!(CliError::config_from(Error::OutsideDomain("x".into())).code, ErrorCode::ConfigInvalid);
    }
}
