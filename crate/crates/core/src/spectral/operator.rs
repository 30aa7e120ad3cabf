//! Loops of symmetric 2×2 matrices stored through their Fourier coefficients.

use std::f64::consts::TAU;

use nalgebra::Matrix2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::profile::{Beta, ContactModel};
use crate::reeb::{Classification, InvariantTorus};

/// Symmetric 2×2 matrix [[xx, xy], [xy, yy]].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn scalar(s: f64) -> Self {
        Self::new(s, 0.0, s)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.xx, self.xy, self.xy, self.yy)
    }

    /// Symmetric part of a general matrix.
    pub fn from_matrix(m: &Matrix2<f64>) -> Self {
        Self::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    fn parts(&self) -> [f64; 3] {
        [self.xx, self.xy, self.yy]
    }

    fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

/// Where an operator came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum OperatorSource {
    Explicit,
    Samples { count: usize },
    Path,
    Orbit {
        theta: f64,
        p: i64,
        q: i64,
        period: f64,
        cover: u32,
        beta: f64,
    },
}

/// S(t) = c(0) + 2 Re Σ_{m ≥ 1} conj(c(m)) e^{2πimt}, c(m) = ∫ S e^{2πimt} dt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticOperator {
    #[serde(skip)]
    coeffs: Vec<[Complex64; 3]>,
    pub source: OperatorSource,
}

const TRUNCATION: f64 = 1e-14;

impl AsymptoticOperator {
    pub fn constant(s: Sym2) -> Self {
        let p = s.parts();
        Self {
            coeffs: vec![[p[0].into(), p[1].into(), p[2].into()]],
            source: OperatorSource::Explicit,
        }
    }

    /// S(t) = s0 + Σ_j cos_j cos(2πjt) + sin_j sin(2πjt), j ≥ 1.
    pub fn fourier(s0: Sym2, cos: &[Sym2], sin: &[Sym2]) -> Result<Self, SpectralError> {
        let all_finite = std::iter::once(&s0)
            .chain(cos)
            .chain(sin)
            .all(|s| s.parts().iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(SpectralError::InvalidOperator("non-finite coefficient".into()));
        }
        let terms = cos.len().max(sin.len());
        let mut coeffs = Vec::with_capacity(terms + 1);
        let p0 = s0.parts();
        coeffs.push([p0[0].into(), p0[1].into(), p0[2].into()]);
        for j in 0..terms {
            let a = cos.get(j).copied().unwrap_or_default().parts();
            let b = sin.get(j).copied().unwrap_or_default().parts();
            coeffs.push(std::array::from_fn(|i| Complex64::new(0.5 * a[i], 0.5 * b[i])));
        }
        let mut op = Self {
            coeffs,
            source: OperatorSource::Explicit,
        };
        op.truncate();
        Ok(op)
    }

    /// Operator from samples S(j/M), j = 0..M-1.
    pub fn from_samples(samples: &[Sym2]) -> Result<Self, SpectralError> {
        let m = samples.len();
        if m < 2 {
            return Err(SpectralError::InvalidOperator("need at least two samples".into()));
        }
        if samples.iter().any(|s| s.parts().iter().any(|v| !v.is_finite())) {
            return Err(SpectralError::InvalidOperator("non-finite sample".into()));
        }
        let fft = FftPlanner::new().plan_fft_inverse(m);
        let keep = (m - 1) / 2;
        let mut coeffs = vec![[Complex64::default(); 3]; keep + 1];
        for comp in 0..3 {
            let mut buf: Vec<Complex64> = samples.iter().map(|s| s.parts()[comp].into()).collect();
            fft.process(&mut buf);
            for (k, c) in coeffs.iter_mut().enumerate() {
                c[comp] = buf[k] / m as f64;
            }
        }
        let mut op = Self {
            coeffs,
            source: OperatorSource::Samples { count: m },
        };
        op.truncate();
        Ok(op)
    }

    /// Operator from general matrix samples, which must be symmetric to 1e-12.
    pub fn from_matrix_samples(samples: &[Matrix2<f64>]) -> Result<Self, SpectralError> {
        let defect = samples
            .iter()
            .fold(0.0f64, |d, m| d.max((m[(0, 1)] - m[(1, 0)]).abs()));
        if defect > 1e-12 {
            return Err(SpectralError::NonSymmetric(defect));
        }
        let sym: Vec<Sym2> = samples.iter().map(Sym2::from_matrix).collect();
        Self::from_samples(&sym)
    }

    /// Operator from samples S(j/M), j = 0..=M, including the endpoint.
    pub fn from_closed_samples(samples: &[Sym2], tol: f64) -> Result<Self, SpectralError> {
        let (first, last) = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) if samples.len() >= 3 => (a, b),
            _ => return Err(SpectralError::InvalidOperator("need at least three samples".into())),
        };
        let defect = first
            .parts()
            .iter()
            .zip(last.parts())
            .fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
        if defect > tol {
            return Err(SpectralError::NonPeriodic(defect));
        }
        Self::from_samples(&samples[..samples.len() - 1])
    }

    fn truncate(&mut self) {
        let scale = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0f64, f64::max);
        while self.coeffs.len() > 1 {
            let last = self.coeffs.last().unwrap();
            if last.iter().all(|z| z.norm() <= TRUNCATION * scale.max(1e-300)) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn with_source(mut self, source: OperatorSource) -> Self {
        self.source = source;
        self
    }

    /// Highest retained harmonic.
    pub fn band(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// c(m) for one entry (0 = xx, 1 = xy, 2 = yy), with c(-m) = conj c(m).
    pub fn coefficient(&self, m: i64, entry: usize) -> Complex64 {
        let k = m.unsigned_abs() as usize;
        match self.coeffs.get(k) {
            None => Complex64::default(),
            Some(c) if m >= 0 => c[entry],
            Some(c) => c[entry].conj(),
        }
    }

    /// Adds c·I.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0][0] += c;
        out.coeffs[0][2] += c;
        out
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn eval(&self, t: f64) -> Sym2 {
        let mut v = [self.coeffs[0][0].re, self.coeffs[0][1].re, self.coeffs[0][2].re];
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let e = Complex64::from_polar(1.0, TAU * m as f64 * t);
            for i in 0..3 {
                v[i] += 2.0 * (c[i].conj() * e).re;
            }
        }
        Sym2::new(v[0], v[1], v[2])
    }

    pub fn samples(&self, m: usize) -> Vec<Sym2> {
        (0..m).map(|j| self.eval(j as f64 / m as f64)).collect()
    }

    /// Sup norm estimate Σ_m |c(m)|.
    pub fn norm_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let w = if m == 0 { 1.0 } else { 2.0 };
                w * c.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .sum()
    }

    pub fn max_sample(&self, m: usize) -> f64 {
        self.samples(m).iter().map(Sym2::max_abs).fold(0.0, f64::max)
    }
}

/// Asymptotic operator of the k-fold cover of the Reeb orbit on `torus`, in
/// the unitary frame ∂θ/√(βD), V·√(β/D) of ξ. It is constant:
/// S = diag(k T κ / β, 0) with κ = (γ' ∧ γ'')/D².
pub fn operator_from_orbit(
    model: &ContactModel,
    torus: &InvariantTorus,
    beta: &Beta,
    cover: u32,
) -> Result<AsymptoticOperator, SpectralError> {
    if cover == 0 {
        return Err(SpectralError::InvalidOperator("cover multiplicity must be at least 1".into()));
    }
    if torus.classification == Classification::Degenerate {
        return Err(SpectralError::InvalidOperator(format!(
            "orbit family at theta = {} is degenerate",
            torus.theta
        )));
    }
    beta.validate()
        .map_err(|e| SpectralError::InvalidOperator(e.to_string()))?;
    let p = model.evaluate(torus.theta);
    let d = p.det();
    let b = beta.at(torus.theta);
    let kappa = cover as f64 * torus.period * p.convexity() / (b * d * d);
    Ok(AsymptoticOperator::constant(Sym2::diag(kappa, 0.0)).with_source(OperatorSource::Orbit {
        theta: torus.theta,
        p: torus.p,
        q: torus.q,
        period: torus.period,
        cover,
        beta: b,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourier_and_samples_agree() {
        let op = AsymptoticOperator::fourier(
            Sym2::new(1.0, 0.2, -0.5),
            &[Sym2::new(0.3, 0.0, 0.1)],
            &[Sym2::ZERO, Sym2::new(0.0, 0.4, 0.0)],
        )
        .unwrap();
        assert_eq!(op.band(), 2);
        let back = AsymptoticOperator::from_samples(&op.samples(32)).unwrap();
        for j in 0..10 {
            let t = j as f64 * 0.0913;
            let (a, b) = (op.eval(t), back.eval(t));
            assert!((a.xx - b.xx).abs() < 1e-13 && (a.xy - b.xy).abs() < 1e-13 && (a.yy - b.yy).abs() < 1e-13);
        }
        assert_eq!(back.band(), 2);
    }

    #[test]
    fn nonsymmetric_samples_rejected() {
        let m = Matrix2::new(1.0, 0.5, 0.4, 1.0);
        assert!(matches!(
            AsymptoticOperator::from_matrix_samples(&[m, m, m]),
            Err(SpectralError::NonSymmetric(_))
        ));
    }

    #[test]
    fn nonperiodic_closed_samples_rejected() {
        let s = [Sym2::scalar(0.0), Sym2::scalar(0.5), Sym2::scalar(1.0)];
        assert!(matches!(
            AsymptoticOperator::from_closed_samples(&s, 1e-10),
            Err(SpectralError::NonPeriodic(_))
        ));
    }
}
