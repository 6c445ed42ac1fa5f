//! Command-line front end: argument types, output rendering, tables and the
//! acceptance self-test.

use std::fmt;

use pcf_core::PcfError;

pub mod render;
pub mod selftest;
pub mod table;

/// A failure that ends the program with a specific exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Convergence(String),
    SelftestFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::SelftestFailed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Convergence(m) => f.write_str(m),
            CliError::SelftestFailed(m) => write!(f, "self-test failed\n{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<PcfError> for CliError {
    fn from(e: PcfError) -> Self {
        match e {
            PcfError::Domain(_) | PcfError::Window { .. } | PcfError::Overflow { .. } => CliError::Domain(e.to_string()),
            PcfError::Convergence { .. } | PcfError::IntegrandNan { .. } | PcfError::Trace { .. } => {
                CliError::Convergence(e.to_string())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(CliError::from(PcfError::Overflow { ln_abs: 800.0 }).exit_code(), 2);
        assert_eq!(CliError::from(PcfError::Window { a: 1.0, x: 9.0 }).exit_code(), 2);
        assert_eq!(CliError::from(PcfError::Trace { worst_residual: 1e-3 }).exit_code(), 3);
        assert_eq!(CliError::from(PcfError::IntegrandNan { at: 0.5 }).exit_code(), 3);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::SelftestFailed("x".into()).exit_code(), 4);
    }
}
