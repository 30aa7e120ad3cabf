//! Fourier–Galerkin discretization of A = -J₀ d/dt - S(t).
//!
//! Basis (orthonormal in L²(S¹, ℝ²)): for k = 0 the constants 1⊗e₁, 1⊗e₂;
//! for k ≥ 1, at index 2 + 4(k-1), the functions √2 cos 2πkt ⊗ e₁, ⊗ e₂,
//! then √2 sin 2πkt ⊗ e₁, ⊗ e₂.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::operator::AsymptoticOperator;
use super::winding::winding_number;
use super::{SpectralError, DEFAULT_WINDOW};
use crate::linalg::{window_eigenpairs, BandMatrix, LanczosOptions};

/// Largest relative eigenvector weight allowed in the top quarter of modes.
pub const TAIL_TOL: f64 = 1e-6;
/// Smallest accepted discretization size.
pub const MIN_MODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralOptions {
    /// Number of Fourier modes N; the matrix has size 2 + 4N.
    pub n_modes: usize,
    /// Eigenvalues in [-window, window] are computed.
    pub window: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            n_modes: 256,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub eigenvalue: f64,
    pub winding: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub eigenvalue: f64,
    pub winding: i64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub n_modes: usize,
    pub window: f64,
    pub eigenpairs: Vec<Eigenpair>,
    pub symmetry_defect: f64,
    /// Eigenfunctions sampled at t_j = j/(4N).
    #[serde(skip, default)]
    pub eigenfunctions: Vec<Vec<[f64; 2]>>,
}

fn index(k: usize, slot: usize) -> usize {
    if k == 0 {
        slot
    } else {
        2 + 4 * (k - 1) + slot
    }
}

/// Galerkin matrix of A on the first `n_modes` Fourier modes.
pub fn assemble(op: &AsymptoticOperator, n_modes: usize) -> BandMatrix {
    let n = 2 + 4 * n_modes;
    let band = op.band().min(n_modes);
    let kb = 4 * band + 3;
    let mut a = BandMatrix::zeros(n, kb);

    for k in 1..=n_modes {
        let w = TAU * k as f64;
        a.add(index(k, 3), index(k, 0), w);
        a.add(index(k, 0), index(k, 3), w);
        a.add(index(k, 1), index(k, 2), -w);
        a.add(index(k, 2), index(k, 1), -w);
    }

    // S entry (i, j) of the 2×2 block maps to coefficient slot.
    let entry = |i: usize, j: usize| if i == j { 2 * i } else { 1 };
    let c = |m: i64, e: usize| op.coefficient(m, e);

    for i in 0..2 {
        for j in 0..2 {
            let e = entry(i, j);
            a.add(index(0, i), index(0, j), -c(0, e).re);
            for l in 1..=n_modes.min(band) {
                let cl = c(l as i64, e);
                let (cs, sn) = (SQRT_2 * cl.re, SQRT_2 * cl.im);
                a.add(index(0, i), index(l, j), -cs);
                a.add(index(l, j), index(0, i), -cs);
                a.add(index(0, i), index(l, 2 + j), -sn);
                a.add(index(l, 2 + j), index(0, i), -sn);
            }
        }
    }
    for k in 1..=n_modes {
        let lo = k.saturating_sub(band).max(1);
        let hi = (k + band).min(n_modes);
        for l in lo..=hi {
            let (kk, ll) = (k as i64, l as i64);
            for i in 0..2 {
                for j in 0..2 {
                    let e = entry(i, j);
                    let sum = c(kk + ll, e);
                    let diff = c(kk - ll, e);
                    let cc = sum.re + diff.re;
                    let ss = diff.re - sum.re;
                    let cs = sum.im + c(ll - kk, e).im;
                    a.add(index(k, i), index(l, j), -cc);
                    a.add(index(k, 2 + i), index(l, 2 + j), -ss);
                    a.add(index(k, i), index(l, 2 + j), -cs);
                }
            }
        }
    }
    // The cos-sin blocks above cover (cos_k, sin_l); mirror them to (sin_l, cos_k).
    for k in 1..=n_modes {
        let lo = k.saturating_sub(band).max(1);
        let hi = (k + band).min(n_modes);
        for l in lo..=hi {
            for i in 0..2 {
                for j in 0..2 {
                    let v = -{
                        let e = entry(i, j);
                        let (kk, ll) = (k as i64, l as i64);
                        c(kk + ll, e).im + c(ll - kk, e).im
                    };
                    a.add(index(l, 2 + j), index(k, i), v);
                }
            }
        }
    }
    a
}

/// Eigenvalues of A in [-window, window] with eigenfunction winding numbers.
pub fn spectrum(op: &AsymptoticOperator, opts: &SpectralOptions) -> Result<SpectralData, SpectralError> {
    if opts.n_modes < MIN_MODES {
        return Err(SpectralError::InvalidOperator(format!("n_modes must be at least {MIN_MODES}")));
    }
    if !(opts.window.is_finite() && opts.window > 0.0) {
        return Err(SpectralError::InvalidOperator("window must be positive".into()));
    }
    let a = assemble(op, opts.n_modes);
    let symmetry_defect = a.symmetry_defect();
    if symmetry_defect > 1e-12 * a.max_abs().max(1.0) {
        return Err(SpectralError::NonSymmetric(symmetry_defect));
    }
    let eig = window_eigenpairs(&a, -opts.window, opts.window, &LanczosOptions::default())?;

    let grid = 4 * opts.n_modes;
    let fft = FftPlanner::new().plan_fft_inverse(grid);
    let mut eigenpairs = Vec::with_capacity(eig.values.len());
    let mut eigenfunctions = Vec::with_capacity(eig.values.len());
    for ((&mu, v), &res) in eig.values.iter().zip(&eig.vectors).zip(&eig.residuals) {
        let mut comps = [vec![Complex64::default(); grid], vec![Complex64::default(); grid]];
        for (i, buf) in comps.iter_mut().enumerate() {
            buf[0] = v[index(0, i)].into();
            for k in 1..=opts.n_modes {
                let z = Complex64::new(v[index(k, i)], -v[index(k, 2 + i)]) * (SQRT_2 / 2.0);
                buf[k] = z;
                buf[grid - k] = z.conj();
            }
            fft.process(buf);
        }
        // Eigenvectors carrying weight in the top quarter of modes are not resolved.
        let cut = 3 * opts.n_modes / 4;
        let tail: f64 = (cut + 1..=opts.n_modes)
            .flat_map(|k| (0..4).map(move |i| (k, i)))
            .map(|(k, i)| v[index(k, i)].powi(2))
            .sum();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tail.sqrt() > TAIL_TOL * norm {
            return Err(SpectralError::Resolution(format!(
                "eigenvalue {mu} has relative weight {:e} above mode {cut}; increase n_modes",
                tail.sqrt() / norm
            )));
        }
        let samples: Vec<[f64; 2]> = (0..grid).map(|j| [comps[0][j].re, comps[1][j].re]).collect();
        let w = winding_number(&samples)?;
        eigenpairs.push(Eigenpair {
            eigenvalue: mu,
            winding: w,
            residual: res,
        });
        eigenfunctions.push(samples);
    }
    let data = SpectralData {
        n_modes: opts.n_modes,
        window: opts.window,
        eigenpairs,
        symmetry_defect,
        eigenfunctions,
    };
    data.check_structure()?;
    Ok(data)
}

impl SpectralData {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenpairs.iter().map(|e| e.eigenvalue).collect()
    }

    /// Eigenvalues grouped by (numerical) equality, with multiplicity.
    pub fn ladder(&self) -> Vec<LadderRung> {
        let mut out: Vec<LadderRung> = Vec::new();
        for e in &self.eigenpairs {
            match out.last_mut() {
                Some(r) if (e.eigenvalue - r.eigenvalue).abs() <= 1e-8 * r.eigenvalue.abs().max(1.0) => {
                    r.multiplicity += 1;
                }
                _ => out.push(LadderRung {
                    eigenvalue: e.eigenvalue,
                    winding: e.winding,
                    multiplicity: 1,
                }),
            }
        }
        out
    }

    /// Windings must be non-decreasing in the eigenvalue, and each winding
    /// strictly inside the observed range must occur exactly twice.
    fn check_structure(&self) -> Result<(), SpectralError> {
        let ev = &self.eigenpairs;
        if ev.is_empty() {
            return Err(SpectralError::Resolution("no eigenvalues in window".into()));
        }
        for pair in ev.windows(2) {
            if pair[1].winding < pair[0].winding {
                return Err(SpectralError::Resolution(format!(
                    "winding decreases from {} to {} between eigenvalues {} and {}",
                    pair[0].winding, pair[1].winding, pair[0].eigenvalue, pair[1].eigenvalue
                )));
            }
        }
        let lo = ev.first().unwrap().winding;
        let hi = ev.last().unwrap().winding;
        for w in lo..=hi {
            let count = ev.iter().filter(|e| e.winding == w).count();
            let interior = w != lo && w != hi;
            if count > 2 || (interior && count != 2) {
                return Err(SpectralError::Resolution(format!(
                    "winding {w} occurs {count} times in the window"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Sym2;

    #[test]
    fn zero_operator_spectrum_is_2pi_k() {
        let op = AsymptoticOperator::constant(Sym2::ZERO);
        let data = spectrum(&op, &SpectralOptions { n_modes: 64, window: 13.0 }).unwrap();
        let ladder = data.ladder();
        let want = [(-2, -4.0 * std::f64::consts::PI), (-1, -TAU), (0, 0.0), (1, TAU), (2, 2.0 * TAU)];
        assert_eq!(ladder.len(), want.len());
        for (r, (w, mu)) in ladder.iter().zip(want) {
            assert_eq!(r.winding, w);
            assert_eq!(r.multiplicity, 2);
            assert!((r.eigenvalue - mu).abs() < 1e-12);
        }
    }

    #[test]
    fn assembled_matrix_is_symmetric() {
        let op = AsymptoticOperator::fourier(
            Sym2::new(0.3, -0.2, 1.1),
            &[Sym2::new(0.5, 0.1, -0.3), Sym2::new(0.0, 0.7, 0.2)],
            &[Sym2::new(-0.4, 0.3, 0.0)],
        )
        .unwrap();
        let a = assemble(&op, 12);
        assert!(a.symmetry_defect() < 1e-15);
    }
}
