use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input, out-of-range parameters.
    #[error("{0}")]
    Validation(String),

    /// The estimator itself failed (NaN integrand, sampler exhaustion).
    #[error("{0}")]
    Numeric(String),

    #[error("{}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
            CliError::Output { .. } => ExitCode::from(1),
        }
    }
}

impl From<mebk::Error> for CliError {
    fn from(e: mebk::Error) -> Self {
        match e {
            mebk::Error::Parameter(_) | mebk::Error::Domain(_) | mebk::Error::Data(_) => CliError::Validation(e.to_string()),
            mebk::Error::Integration { .. } | mebk::Error::RejectionCap(_) => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_errors_map_to_exit_codes() {
        let code = |e: mebk::Error| CliError::from(e).exit_code();
        assert_eq!(code(mebk::Error::Parameter("x".into())), ExitCode::from(2));
        assert_eq!(code(mebk::Error::Domain("x".into())), ExitCode::from(2));
        assert_eq!(code(mebk::Error::Data("x".into())), ExitCode::from(2));
        assert_eq!(code(mebk::Error::Integration { point: vec![0.5] }), ExitCode::from(3));
        assert_eq!(code(mebk::Error::RejectionCap(10)), ExitCode::from(3));
    }
}
