//! Conley–Zehnder indices from spectral data and from symplectic paths.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use serde::Serialize;

use super::operator::{AsymptoticOperator, OperatorSource, Sym2};
use super::{SpectralData, SpectralError, SHIFT_GUARD};
use crate::ode::Dopri5;

/// J₀ = [[0, -1], [1, 0]].
pub fn j0() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlphaParity {
    pub alpha_minus: i64,
    pub alpha_plus: i64,
    pub parity: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CzMethod {
    Spectral,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CzResult {
    pub alpha_minus: i64,
    pub alpha_plus: i64,
    pub parity: i64,
    pub cz: i64,
    pub shift: f64,
    pub method: CzMethod,
}

/// α₋ = largest winding among eigenvalues below `c`, α₊ = smallest winding
/// above `c`, parity = α₊ - α₋.
pub fn alpha_parity(data: &SpectralData, c: f64) -> Result<AlphaParity, SpectralError> {
    if let Some(e) = data
        .eigenpairs
        .iter()
        .find(|e| (e.eigenvalue - c).abs() <= SHIFT_GUARD)
    {
        return Err(SpectralError::ShiftOnEigenvalue {
            shift: c,
            eigenvalue: e.eigenvalue,
            guard: SHIFT_GUARD,
        });
    }
    let below = data.eigenpairs.iter().filter(|e| e.eigenvalue < c).map(|e| e.winding).max();
    let above = data.eigenpairs.iter().filter(|e| e.eigenvalue > c).map(|e| e.winding).min();
    let (am, ap) = match (below, above) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(SpectralError::Resolution(format!(
                "shift {c} is not bracketed by eigenvalues in the window"
            )))
        }
    };
    let parity = ap - am;
    if !(parity == 0 || parity == 1) {
        return Err(SpectralError::Resolution(format!(
            "windings jump from {am} to {ap} across shift {c}"
        )));
    }
    Ok(AlphaParity {
        alpha_minus: am,
        alpha_plus: ap,
        parity,
    })
}

/// μ_CZ = 2α₋ + p of the operator A - c.
pub fn cz_spectral(data: &SpectralData, c: f64) -> Result<CzResult, SpectralError> {
    let ap = alpha_parity(data, c)?;
    Ok(CzResult {
        alpha_minus: ap.alpha_minus,
        alpha_plus: ap.alpha_plus,
        parity: ap.parity,
        cz: 2 * ap.alpha_minus + ap.parity,
        shift: c,
        method: CzMethod::Spectral,
    })
}

/// Samples Ψ(t_j), Ψ'(t_j) of a path in Sp(2) on t_j = j/M, j = 0..=M.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPath {
    pub values: Vec<Matrix2<f64>>,
    pub derivatives: Vec<Matrix2<f64>>,
}

fn rotation(a: f64) -> Matrix2<f64> {
    let (s, c) = a.sin_cos();
    Matrix2::new(c, -s, s, c)
}

impl SymplecticPath {
    pub fn new(values: Vec<Matrix2<f64>>, derivatives: Vec<Matrix2<f64>>) -> Result<Self, SpectralError> {
        if values.len() < 3 || values.len() != derivatives.len() {
            return Err(SpectralError::InvalidOperator(
                "path needs at least three samples with matching derivatives".into(),
            ));
        }
        Ok(Self { values, derivatives })
    }

    /// Ψ(t) = R(angle · t).
    pub fn rotation(angle: f64, segments: usize) -> Self {
        let m = segments.max(2);
        let ts = (0..=m).map(|j| j as f64 / m as f64);
        Self {
            values: ts.clone().map(|t| rotation(angle * t)).collect(),
            derivatives: ts.map(|t| angle * j0() * rotation(angle * t)).collect(),
        }
    }

    /// Samples a closed-form path and its derivative.
    pub fn from_fn(segments: usize, f: impl Fn(f64) -> (Matrix2<f64>, Matrix2<f64>)) -> Self {
        let m = segments.max(2);
        let (values, derivatives) = (0..=m).map(|j| f(j as f64 / m as f64)).unzip();
        Self { values, derivatives }
    }

    /// Path from values only; derivatives by fourth-order finite differences.
    pub fn from_samples(values: Vec<Matrix2<f64>>) -> Result<Self, SpectralError> {
        let n = values.len();
        if n < 5 {
            return Err(SpectralError::InvalidOperator("need at least five path samples".into()));
        }
        let h = 1.0 / (n - 1) as f64;
        let v = &values;
        let derivatives = (0..n)
            .map(|i| {
                if i >= 2 && i + 2 < n {
                    (v[i - 2] - v[i - 1] * 8.0 + v[i + 1] * 8.0 - v[i + 2]) / (12.0 * h)
                } else if i < 2 {
                    (v[i] * -25.0 + v[i + 1] * 48.0 - v[i + 2] * 36.0 + v[i + 3] * 16.0 - v[i + 4] * 3.0) / (12.0 * h)
                } else {
                    (v[i] * 25.0 - v[i - 1] * 48.0 + v[i - 2] * 36.0 - v[i - 3] * 16.0 + v[i - 4] * 3.0) / (12.0 * h)
                }
            })
            .collect();
        Ok(Self { values, derivatives })
    }

    /// Ψ' = J₀ (S(t) + shift) Ψ, Ψ(0) = I.
    pub fn hamiltonian_flow(op: &AsymptoticOperator, shift: f64, segments: usize) -> Result<Self, SpectralError> {
        let m = segments.max(2);
        let s_at = |t: f64| {
            let s = op.eval(t);
            Sym2::new(s.xx + shift, s.xy, s.yy + shift).matrix()
        };
        let rhs = |t: f64, y: &[f64; 4]| {
            let psi = Matrix2::new(y[0], y[1], y[2], y[3]);
            let d = j0() * s_at(t) * psi;
            [d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]]
        };
        let solver = Dopri5::with_tolerances(1e-12, 1e-14);
        let mut y = [1.0, 0.0, 0.0, 1.0];
        let mut values = vec![Matrix2::identity()];
        let mut derivatives = vec![j0() * s_at(0.0)];
        for j in 0..m {
            let (t0, t1) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
            y = solver.solve(rhs, t0, y, t1)?;
            let psi = Matrix2::new(y[0], y[1], y[2], y[3]);
            values.push(psi);
            derivatives.push(j0() * s_at(t1) * psi);
        }
        Ok(Self { values, derivatives })
    }

    pub fn endpoint(&self) -> Matrix2<f64> {
        *self.values.last().unwrap()
    }

    fn check(&self) -> Result<(), SpectralError> {
        let start = (self.values[0] - Matrix2::identity()).abs().max();
        if start > 1e-10 {
            return Err(SpectralError::PathStart(start));
        }
        // ad - bc cancels, so the defect is measured against |Psi|^2.
        let drift = self
            .values
            .iter()
            .map(|m| (m.determinant() - 1.0).abs() / m.norm_squared().max(1.0))
            .fold(0.0, f64::max);
        if drift > 1e-8 {
            return Err(SpectralError::NonSymplecticPath(drift));
        }
        Ok(())
    }
}

/// Conley–Zehnder index of a path in Sp(2) starting at I with
/// nondegenerate endpoint, via the rotation of test vectors.
pub fn cz_path(path: &SymplecticPath) -> Result<CzResult, SpectralError> {
    path.check()?;
    let end = path.endpoint();
    let tr = end.trace();
    if (2.0 - tr).abs() <= 1e-10 {
        return Err(SpectralError::DegenerateEndpoint((2.0 - tr).abs()));
    }
    let mut result: Option<i64> = None;
    for k in 0..6 {
        let a = PI * k as f64 / 6.0 + 0.1;
        let v = nalgebra::Vector2::new(a.cos(), a.sin());
        let mut total = 0.0;
        let mut prev = v;
        for m in &path.values[1..] {
            let w = m * v;
            let step = (prev.x * w.y - prev.y * w.x).atan2(prev.dot(&w));
            if step.abs() > 0.5 * PI {
                return Err(SpectralError::Undersampled);
            }
            total += step;
            prev = w;
        }
        let turns = total / TAU;
        let cz = if tr > 2.0 {
            2 * turns.round() as i64
        } else {
            2 * turns.floor() as i64 + 1
        };
        match result {
            None => result = Some(cz),
            Some(r) if r != cz => {
                return Err(SpectralError::Resolution(format!(
                    "test vectors disagree on the index ({r} vs {cz})"
                )))
            }
            _ => {}
        }
    }
    let cz = result.unwrap();
    let (am, p) = if cz.rem_euclid(2) == 1 {
        ((cz - 1) / 2, 1)
    } else {
        (cz / 2, 0)
    };
    Ok(CzResult {
        alpha_minus: am,
        alpha_plus: am + p,
        parity: p,
        cz,
        shift: 0.0,
        method: CzMethod::Path,
    })
}

/// Recovers S = -J₀ Ψ' Ψ⁻¹ from a path whose endpoint generator closes up.
pub fn operator_from_path(path: &SymplecticPath) -> Result<AsymptoticOperator, SpectralError> {
    path.check()?;
    let mut samples = Vec::with_capacity(path.values.len());
    let mut scale: f64 = 1.0;
    for (psi, dpsi) in path.values.iter().zip(&path.derivatives) {
        let inv = psi
            .try_inverse()
            .ok_or(SpectralError::NonSymplecticPath(f64::INFINITY))?;
        scale = scale.max(psi.abs().max().powi(2));
        let s = -j0() * dpsi * inv;
        samples.push(Sym2::from_matrix(&s));
    }
    let op = AsymptoticOperator::from_closed_samples(&samples, 1e-9 * scale)?;
    Ok(op.with_source(OperatorSource::Path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_positive_rotation_has_index_one() {
        let r = cz_path(&SymplecticPath::rotation(0.3, 64)).unwrap();
        assert_eq!(r.cz, 1);
        let r = cz_path(&SymplecticPath::rotation(-0.3, 64)).unwrap();
        assert_eq!(r.cz, -1);
    }

    #[test]
    fn full_rotation_is_degenerate() {
        assert!(matches!(
            cz_path(&SymplecticPath::rotation(TAU, 64)),
            Err(SpectralError::DegenerateEndpoint(_))
        ));
    }

    #[test]
    fn hyperbolic_path_has_even_index() {
        let path = SymplecticPath::from_fn(64, |t| {
            let e = (2.0 * t).exp();
            (Matrix2::new(e, 0.0, 0.0, 1.0 / e), Matrix2::new(2.0 * e, 0.0, 0.0, -2.0 / e))
        });
        assert_eq!(cz_path(&path).unwrap().cz, 0);
    }

    #[test]
    fn path_must_start_at_identity() {
        let path = SymplecticPath::from_fn(16, |t| (rotation(1.0 + t), j0() * rotation(1.0 + t)));
        assert!(matches!(cz_path(&path), Err(SpectralError::PathStart(_))));
    }

    #[test]
    fn rotation_path_generator_is_scalar() {
        let op = operator_from_path(&SymplecticPath::rotation(2.5, 32)).unwrap();
        let s = op.eval(0.3);
        assert!((s.xx - 2.5).abs() < 1e-12 && s.xy.abs() < 1e-12 && (s.yy - 2.5).abs() < 1e-12);
    }
}
