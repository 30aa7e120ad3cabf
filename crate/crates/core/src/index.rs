//! Integer index arithmetic for punctured holomorphic curves: constrained
//! normal Chern numbers, Fredholm indices, covers and the adjunction identity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{alpha_parity, SpectralData, SpectralError};

/// Eigenvalues with |μ| below this count as zero when choosing weights.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("no valid constraint weight: {0}")]
    NoValidWeight(String),
    #[error("constraint check failed: alpha_minus = {alpha_minus}, alpha_plus = {alpha_plus}, expected ({want}, {})", want + 1)]
    ConstraintCheck { alpha_minus: i64, alpha_plus: i64, want: i64 },
    #[error("puncture {0} has no {1} record")]
    MissingRecord(usize, &'static str),
    #[error("invalid curve data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PunctureClass {
    Constrained,
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PunctureRecord {
    pub class: PunctureClass,
    pub wind_e: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default)]
    pub alpha_minus: Option<i64>,
    #[serde(default)]
    pub parity: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuncturedCurveData {
    pub genus: u32,
    #[serde(default)]
    pub punctures: Vec<PunctureRecord>,
    pub wind_pi: i64,
    #[serde(default)]
    pub delta: i64,
    #[serde(default)]
    pub c1: i64,
    /// Punctures simply covered and asymptotic to distinct orbits.
    #[serde(default = "yes")]
    pub simply_covered_distinct: bool,
}

fn yes() -> bool {
    true
}

impl PuncturedCurveData {
    pub fn validate(&self) -> Result<(), IndexError> {
        if self.wind_pi < 0 {
            return Err(IndexError::InvalidData("wind_pi must be non-negative".into()));
        }
        if self.delta < 0 {
            return Err(IndexError::InvalidData("delta must be non-negative".into()));
        }
        for (i, p) in self.punctures.iter().enumerate() {
            if let Some(par) = p.parity {
                if par != 0 && par != 1 {
                    return Err(IndexError::InvalidData(format!("puncture {i}: parity must be 0 or 1")));
                }
            }
            if let Some(w) = p.weight {
                let ok = match p.class {
                    PunctureClass::Constrained => w < 0.0,
                    PunctureClass::Unconstrained => w > 0.0,
                };
                if !ok {
                    return Err(IndexError::InvalidData(format!("puncture {i}: weight {w} has the wrong sign")));
                }
            }
        }
        Ok(())
    }
}

/// Chooses the weight c_z and records α₋(γ - c_z) and the parity.
pub fn select_constraint(class: PunctureClass, wind_e: i64, data: &SpectralData) -> Result<PunctureRecord, IndexError> {
    let ev = data.eigenvalues();
    let weight = match class {
        PunctureClass::Constrained => {
            let mu_star = data
                .eigenpairs
                .iter()
                .filter(|e| e.winding == wind_e && e.eigenvalue < -ZERO_EIGENVALUE_TOL)
                .map(|e| e.eigenvalue)
                .fold(f64::NEG_INFINITY, f64::max);
            if !mu_star.is_finite() {
                return Err(IndexError::NoValidWeight(format!(
                    "no negative eigenvalue with winding {wind_e} in the window"
                )));
            }
            let next = ev
                .iter()
                .copied()
                .filter(|&m| m > mu_star + 1e-8 * mu_star.abs().max(1.0))
                .fold(f64::INFINITY, f64::min);
            let gap = next - mu_star;
            mu_star + gap.min(mu_star.abs()) / 2.0
        }
        PunctureClass::Unconstrained => {
            let pos = ev
                .iter()
                .copied()
                .filter(|&m| m > ZERO_EIGENVALUE_TOL)
                .fold(f64::INFINITY, f64::min);
            if !pos.is_finite() {
                return Err(IndexError::NoValidWeight("no positive eigenvalue in the window".into()));
            }
            pos / 2.0
        }
    };
    let ap = alpha_parity(data, weight)?;
    if class == PunctureClass::Constrained && (ap.alpha_minus != wind_e || ap.alpha_plus != wind_e + 1) {
        return Err(IndexError::ConstraintCheck {
            alpha_minus: ap.alpha_minus,
            alpha_plus: ap.alpha_plus,
            want: wind_e,
        });
    }
    Ok(PunctureRecord {
        class,
        wind_e,
        weight: Some(weight),
        alpha_minus: Some(ap.alpha_minus),
        parity: Some(ap.parity),
    })
}

pub fn select_constraints(items: &[(PunctureClass, i64, &SpectralData)]) -> Result<Vec<PunctureRecord>, IndexError> {
    items
        .iter()
        .map(|(class, w, data)| select_constraint(*class, *w, data))
        .collect()
}

/// c_N = wind_π + Σ_z (α₋(γ_z - c_z) - wind(e_z)).
pub fn normal_chern(data: &PuncturedCurveData) -> Result<i64, IndexError> {
    data.validate()?;
    let mut c = data.wind_pi;
    for (i, p) in data.punctures.iter().enumerate() {
        let am = p.alpha_minus.ok_or(IndexError::MissingRecord(i, "alpha_minus"))?;
        c += am - p.wind_e;
    }
    Ok(c)
}

/// #Γ₀(c): punctures with even parity.
pub fn even_punctures(data: &PuncturedCurveData) -> Result<i64, IndexError> {
    let mut n = 0;
    for (i, p) in data.punctures.iter().enumerate() {
        if p.parity.ok_or(IndexError::MissingRecord(i, "parity"))? == 0 {
            n += 1;
        }
    }
    Ok(n)
}

/// ind = 2 c_N + 2 - 2g - #Γ₀(c).
pub fn fredholm_index(data: &PuncturedCurveData) -> Result<i64, IndexError> {
    let cn = normal_chern(data)?;
    let g = data.genus as i64;
    Ok(2 * cn + 2 - 2 * g - even_punctures(data)?)
}

pub fn closed_sphere_index(c1: i64) -> i64 {
    -2 + 2 * c1
}

/// Index of a k-fold cover: k · ind₀ + 2(k - 1).
pub fn cover_index(ind0: i64, k: u32) -> Result<i64, IndexError> {
    if k == 0 {
        return Err(IndexError::InvalidData("cover multiplicity must be at least 1".into()));
    }
    let k = k as i64;
    Ok(k * ind0 + 2 * (k - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjunctionVerdict {
    EmbeddedCompatible,
    Singular,
    ParityViolation,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdjunctionReport {
    pub self_intersection: Option<i64>,
    pub normal_chern: Option<i64>,
    pub verdict: AdjunctionVerdict,
}

/// i(u; c | u; c) = 2δ + c_N.
pub fn adjunction(data: &PuncturedCurveData) -> Result<AdjunctionReport, IndexError> {
    if !data.simply_covered_distinct {
        return Ok(AdjunctionReport {
            self_intersection: None,
            normal_chern: None,
            verdict: AdjunctionVerdict::NotApplicable,
        });
    }
    let cn = normal_chern(data)?;
    Ok(AdjunctionReport {
        self_intersection: Some(2 * data.delta + cn),
        normal_chern: Some(cn),
        verdict: if data.delta == 0 {
            AdjunctionVerdict::EmbeddedCompatible
        } else {
            AdjunctionVerdict::Singular
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosedAdjunction {
    pub delta: Option<i64>,
    pub verdict: AdjunctionVerdict,
}

/// Solves v•v = 2δ + c₁ - 2 for δ on a closed sphere.
pub fn closed_adjunction(self_intersection: i64, c1: i64) -> ClosedAdjunction {
    let twice = self_intersection - c1 + 2;
    if twice.rem_euclid(2) != 0 || twice < 0 {
        return ClosedAdjunction {
            delta: None,
            verdict: AdjunctionVerdict::ParityViolation,
        };
    }
    let delta = twice / 2;
    ClosedAdjunction {
        delta: Some(delta),
        verdict: if delta == 0 {
            AdjunctionVerdict::EmbeddedCompatible
        } else {
            AdjunctionVerdict::Singular
        },
    }
}
