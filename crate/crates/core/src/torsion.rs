//! Checks of the oval torus: Morse–Bott tori, the special orbits at θ = 1/4
//! and 3/4, and the lower bound on all other periods.

use serde::Serialize;
use thiserror::Error;

use crate::ode::OdeError;
use crate::profile::{ContactModel, ProfileCurve, ProfileError};
use crate::reeb::{rational_tori, reeb_field, Classification, ReebError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorsionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Reeb(#[from] ReebError),
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("decay fit failed: {0}")]
    FitFailure(String),
}

/// Bound on the period for tori away from the special ones.
pub const PERIOD_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiamondRegion {
    /// θ ∈ {0, 1/4, 1/2, 3/4}.
    Special,
    /// |f| + |g| ≤ 1/2; bound |q||g| > 1/4.
    Inside,
    /// |f| + |g| > 1/2; bound |p||f| + |q||g| > 1/2.
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiamondRecord {
    pub theta: f64,
    pub p: i64,
    pub q: i64,
    pub period: f64,
    pub classification: Classification,
    pub region: DiamondRegion,
    pub bound: f64,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub theta: f64,
    pub p: i64,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionReport {
    pub epsilon: Option<f64>,
    pub qmax: u32,
    /// h(1/4); equals ε exactly for the oval.
    pub radius_at_quarter: f64,
    pub torus_count: usize,
    pub morse_bott_ok: bool,
    pub special_field_ok: bool,
    pub special_periods: (f64, f64),
    pub min_other_period: f64,
    pub min_other_witness: Option<Witness>,
    pub bounds_ok: bool,
    pub verdict: Verdict,
    pub diamond_case_log: Vec<DiamondRecord>,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

pub fn verify_torsion_lemma(curve: &ProfileCurve, qmax: u32) -> Result<TorsionReport, TorsionError> {
    if qmax < 2 {
        return Err(TorsionError::InvalidArgument("qmax must be at least 2".into()));
    }
    let radius_at_quarter = curve.radius(0.25);
    let mut report = TorsionReport {
        epsilon: curve.epsilon(),
        qmax,
        radius_at_quarter,
        torus_count: 0,
        morse_bott_ok: false,
        special_field_ok: false,
        special_periods: (f64::NAN, f64::NAN),
        min_other_period: f64::NAN,
        min_other_witness: None,
        bounds_ok: false,
        verdict: Verdict::NotApplicable,
        diamond_case_log: Vec::new(),
    };
    let eps = match curve.epsilon() {
        Some(e) if (radius_at_quarter - e).abs() < 1e-12 => e,
        _ => return Ok(report),
    };
    let model = ContactModel::new(curve.clone())?;
    let tori = rational_tori(&model, qmax)?;
    report.torus_count = tori.len();
    report.morse_bott_ok = tori.iter().all(|t| t.classification == Classification::MorseBott);

    let top = reeb_field(&model, 0.25);
    let bottom = reeb_field(&model, 0.75);
    let tol = 1e-9 / eps;
    report.special_field_ok = top.x.abs() < tol
        && (top.y - 1.0 / eps).abs() < tol
        && bottom.x.abs() < tol
        && (bottom.y + 1.0 / eps).abs() < tol;

    let mut t_top = f64::NAN;
    let mut t_bottom = f64::NAN;
    let mut min_other = f64::INFINITY;
    let mut witness = None;
    let mut bounds_ok = true;
    for t in &tori {
        let pt = model.evaluate(t.theta);
        let is_top = (t.p, t.q) == (0, 1) && near(t.theta, 0.25);
        let is_bottom = (t.p, t.q) == (0, -1) && near(t.theta, 0.75);
        if is_top {
            t_top = t.period;
        } else if is_bottom {
            t_bottom = t.period;
        } else if t.period < min_other {
            min_other = t.period;
            witness = Some(Witness {
                theta: t.theta,
                p: t.p,
                q: t.q,
            });
        }
        let special = [0.0, 0.25, 0.5, 0.75, 1.0].iter().any(|&s| near(t.theta, s));
        let (region, bound, ok) = if special {
            (DiamondRegion::Special, t.period, true)
        } else if pt.f.abs() + pt.g.abs() <= 0.5 {
            let b = (t.q as f64).abs() * pt.g.abs();
            (DiamondRegion::Inside, b, b > 0.25)
        } else {
            let b = (t.p as f64).abs() * pt.f.abs() + (t.q as f64).abs() * pt.g.abs();
            (DiamondRegion::Outside, b, b > 0.5)
        };
        bounds_ok &= ok;
        report.diamond_case_log.push(DiamondRecord {
            theta: t.theta,
            p: t.p,
            q: t.q,
            period: t.period,
            classification: t.classification,
            region,
            bound,
            bound_ok: ok,
        });
    }
    report.special_periods = (t_top, t_bottom);
    report.min_other_period = min_other;
    report.min_other_witness = witness;
    report.bounds_ok = bounds_ok;
    let pass = report.morse_bott_ok
        && report.special_field_ok
        && (t_top - eps).abs() < 1e-9
        && (t_bottom - eps).abs() < 1e-9
        && min_other > PERIOD_FLOOR;
    report.verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    Ok(report)
}
