//! Asymptotic operators A = -J₀ d/dt - S(t) on loops in ℝ², their spectra,
//! eigenfunction winding numbers and Conley–Zehnder indices.

pub mod cz;
pub mod discretize;
pub mod operator;
pub mod winding;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::ode::OdeError;
use crate::reeb::ReebError;

pub use cz::{alpha_parity, cz_path, cz_spectral, operator_from_path, AlphaParity, CzMethod, CzResult, SymplecticPath};
pub use discretize::{assemble, spectrum, Eigenpair, LadderRung, SpectralData, SpectralOptions, MIN_MODES, TAIL_TOL};
pub use operator::{operator_from_orbit, AsymptoticOperator, OperatorSource, Sym2};
pub use winding::winding_number;

/// Default half-width of the spectral window.
pub const DEFAULT_WINDOW: f64 = 6.0 * std::f64::consts::PI;
/// Shifts closer than this to an eigenvalue are rejected.
pub const SHIFT_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("operator is not symmetric (defect {0:e})")]
    NonSymmetric(f64),
    #[error("operator is not periodic (defect {0:e})")]
    NonPeriodic(f64),
    #[error("eigenfunction vanishes on the sampling grid")]
    VanishingLoop,
    #[error("loop undersampled: consecutive samples differ by nearly a half turn")]
    Undersampled,
    #[error("spectral resolution failure: {0}")]
    Resolution(String),
    #[error("shift {shift} lies within {guard:e} of eigenvalue {eigenvalue}")]
    ShiftOnEigenvalue { shift: f64, eigenvalue: f64, guard: f64 },
    #[error("degenerate endpoint: |2 - tr Psi(1)| = {0:e}")]
    DegenerateEndpoint(f64),
    #[error("path does not start at the identity (defect {0:e})")]
    PathStart(f64),
    #[error("path leaves Sp(2): relative |det - 1| = {0:e}")]
    NonSymplecticPath(f64),
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Reeb(#[from] ReebError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
}
