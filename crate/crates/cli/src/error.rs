use std::fmt;

use reeblab::index::IndexError;
use reeblab::linalg::LinalgError;
use reeblab::ode::OdeError;
use reeblab::profile::ProfileError;
use reeblab::reeb::ReebError;
use reeblab::spectral::SpectralError;
use reeblab::torsion::TorsionError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Errors that abort a run before a report is written. Verified failures
/// that still produce a report show up in its verdict instead.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    /// A check that aborts the pipeline came out negative.
    Failed(String),
    Numerical(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAIL,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Numerical(m) => write!(f, "numerical resolution error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<OdeError> for CliError {
    fn from(e: OdeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ReebError> for CliError {
    fn from(e: ReebError) -> Self {
        match e {
            ReebError::NonConvex(_) | ReebError::InvalidQmax | ReebError::InvalidArgument(_) => {
                CliError::Usage(e.to_string())
            }
            ReebError::Undersampled(_) | ReebError::SignConvention { .. } | ReebError::Integration(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::InvalidOperator(_)
            | SpectralError::NonSymmetric(_)
            | SpectralError::NonPeriodic(_)
            | SpectralError::ShiftOnEigenvalue { .. }
            | SpectralError::PathStart(_) => CliError::Usage(e.to_string()),
            SpectralError::Reeb(r) => r.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::Spectral(s) => s.into(),
            IndexError::ConstraintCheck { .. } => CliError::Failed(e.to_string()),
            IndexError::NoValidWeight(_) | IndexError::MissingRecord(..) | IndexError::InvalidData(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

impl From<TorsionError> for CliError {
    fn from(e: TorsionError) -> Self {
        match e {
            TorsionError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            TorsionError::Profile(p) => p.into(),
            TorsionError::Reeb(r) => r.into(),
            TorsionError::Ode(o) => o.into(),
            TorsionError::FitFailure(_) => CliError::Numerical(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_maps_to_three() {
        let e: CliError = SpectralError::Resolution("tail".into()).into();
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
        let e: CliError = IndexError::Spectral(SpectralError::Undersampled).into();
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
    }

    #[test]
    fn bad_input_maps_to_two() {
        let e: CliError = TorsionError::Profile(ProfileError::InvalidParameter("eps".into())).into();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        let e: CliError = SpectralError::InvalidOperator("x".into()).into();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        let e: CliError = IndexError::NoValidWeight("none".into()).into();
        assert_eq!(e.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn failed_constraint_check_maps_to_one() {
        let e: CliError = IndexError::ConstraintCheck { alpha_minus: 0, alpha_plus: 0, want: 0 }.into();
        assert_eq!(e.exit_code(), EXIT_FAIL);
    }
}
