//! Banded symmetric matrices and a shift-invert block Lanczos eigensolver for
//! eigenvalues inside a bounded window.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular at pivot {0}")]
    Singular(usize),
    #[error("eigensolver did not converge within {0} Krylov vectors")]
    NoConvergence(usize),
}

/// Square matrix with `kb` nonzero diagonals on each side of the main one.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kb: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kb: usize) -> Self {
        let kb = kb.min(n.saturating_sub(1));
        Self {
            n,
            kb,
            data: vec![0.0; n * (2 * kb + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.kb
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize;
        if off.unsigned_abs() > self.kb || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (2 * self.kb + 1) + (off + self.kb as isize) as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds `v` to entry `(i, j)`; entries outside the band must be zero.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        match self.slot(i, j) {
            Some(s) => self.data[s] += v,
            None => debug_assert!(v == 0.0, "entry ({i},{j}) outside band"),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        let w = 2 * self.kb + 1;
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kb);
            let hi = (i + self.kb).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += row[j + self.kb - i] * x[j];
            }
            *yi = acc;
        }
        y
    }

    /// Largest |A_ij - A_ji|.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..=(i + self.kb).min(self.n - 1) {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute row sum, which bounds the 2-norm of a symmetric matrix.
    pub fn norm_inf(&self) -> f64 {
        let w = 2 * self.kb + 1;
        self.data.chunks(w).map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

/// LU factorization with partial pivoting of `A - shift I`, kept in band form.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &BandMatrix, shift: f64) -> Result<Self, LinalgError> {
        let n = a.n;
        let kl = a.kb;
        let ku = 2 * a.kb;
        let w = kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * w],
            piv: vec![0; n],
        };
        for i in 0..n {
            let lo = i.saturating_sub(a.kb);
            let hi = (i + a.kb).min(n - 1);
            for j in lo..=hi {
                let v = a.get(i, j) - if i == j { shift } else { 0.0 };
                let s = lu.idx(i, j);
                lu.data[s] = v;
            }
        }
        let scale = a.max_abs().max(shift.abs()).max(1.0);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).abs();
            for i in k + 1..=last {
                let v = lu.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-13 * scale {
                return Err(LinalgError::Singular(k));
            }
            lu.piv[k] = p;
            let jmax = (k + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a1 = lu.idx(k, j);
                    let a2 = lu.idx(p, j);
                    lu.data.swap(a1, a2);
                }
            }
            let pivot = lu.at(k, k);
            for i in k + 1..=last {
                let s = lu.idx(i, k);
                let l = lu.data[s] / pivot;
                lu.data[s] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let t = lu.at(k, j);
                        let s2 = lu.idx(i, j);
                        lu.data[s2] -= l * t;
                    }
                }
            }
        }
        Ok(lu)
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.at(i, k) * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..=(i + self.ku).min(n - 1) {
                acc -= self.at(i, j) * x[j];
            }
            x[i] = acc / self.at(i, i);
        }
        x
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub block: usize,
    pub max_dim: usize,
    /// Residual tolerance relative to `max(1, |mu|)`, never tighter than a
    /// rounding floor proportional to the norm of the matrix.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            block: 4,
            max_dim: 900,
            residual_tol: 1e-9,
            seed: 0x5eed_1ab5,
        }
    }
}

/// Eigenpairs with eigenvalue in a closed window, ascending.
#[derive(Debug, Clone)]
pub struct WindowEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub krylov_dim: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `v` against `basis` twice, then normalizes. Returns `None`
/// if `v` lies numerically in the span.
fn orthonormalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n0 = norm(&v);
    if n0 == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    let nv = norm(&v);
    if nv <= 1e-10 * n0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    Some(v)
}

/// All eigenpairs of the symmetric band matrix `a` with eigenvalue in
/// `[lo - slack, hi + slack]`, where `slack` absorbs rounding at the edges.
pub fn window_eigenpairs(
    a: &BandMatrix,
    lo: f64,
    hi: f64,
    opts: &LanczosOptions,
) -> Result<WindowEigen, LinalgError> {
    let n = a.dim();
    let slack = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    let width = hi - lo;

    // Small problems are cheaper to do densely.
    if n <= 160 {
        let eig = SymmetricEigen::new(a.to_dense());
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
            .filter(|&i| eig.eigenvalues[i] >= lo - slack && eig.eigenvalues[i] <= hi + slack)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let residuals = pairs.iter().map(|(mu, v)| residual(a, *mu, v)).collect();
        return Ok(WindowEigen {
            values: pairs.iter().map(|p| p.0).collect(),
            vectors: pairs.into_iter().map(|p| p.1).collect(),
            residuals,
            krylov_dim: n,
        });
    }

    let mut sigma = 0.5 * (lo + hi) + 0.0917 * width.max(1.0) / 12.0;
    let lu = loop {
        match BandLu::factor(a, sigma) {
            Ok(lu) => break lu,
            Err(_) => sigma += 0.0371 * width.max(1.0) / 12.0,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() - 0.5).collect() };

    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut z: Vec<Vec<f64>> = Vec::new();
    let mut frontier: Vec<usize> = Vec::new();
    while frontier.len() < opts.block {
        if let Some(v) = orthonormalize(random_vec(&mut rng), &q) {
            z.push(lu.solve(&v));
            q.push(v);
            frontier.push(q.len() - 1);
        }
    }

    let max_dim = opts.max_dim.min(n);
    // Residuals cannot drop below rounding in the shifted solves, which
    // grows with the norm of `a`. Stiff operators hit that floor first.
    let floor = 30.0 * n as f64 * f64::EPSILON * a.norm_inf();
    let mut prev_count: Option<usize> = None;
    let mut next_check = 6 * opts.block;
    loop {
        // Expand with the images of the newest block.
        let mut new_front = Vec::new();
        for &i in &frontier {
            if q.len() >= max_dim {
                break;
            }
            if let Some(v) = orthonormalize(z[i].clone(), &q) {
                z.push(lu.solve(&v));
                q.push(v);
                new_front.push(q.len() - 1);
            }
        }
        while new_front.len() < opts.block && q.len() < max_dim {
            if let Some(v) = orthonormalize(random_vec(&mut rng), &q) {
                z.push(lu.solve(&v));
                q.push(v);
                new_front.push(q.len() - 1);
            }
        }
        frontier = new_front;

        let m = q.len();
        if m < next_check && m < max_dim {
            continue;
        }
        next_check = m + 4 * opts.block;

        // Rayleigh–Ritz on the inverse operator.
        let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&q[i], &z[j]) + dot(&q[j], &z[i])));
        let eig = SymmetricEigen::new(h);
        let reach = 1.0 / ((lo - sigma).abs().max((hi - sigma).abs()) * 1.25 + 1.0);
        let mut pairs = Vec::new();
        let mut all_converged = true;
        for k in 0..m {
            let nu = eig.eigenvalues[k];
            if nu.abs() < reach {
                continue;
            }
            let mut y = vec![0.0; n];
            for (j, qj) in q.iter().enumerate() {
                let c = eig.eigenvectors[(j, k)];
                if c != 0.0 {
                    for (yi, qi) in y.iter_mut().zip(qj) {
                        *yi += c * qi;
                    }
                }
            }
            let ny = norm(&y);
            y.iter_mut().for_each(|v| *v /= ny);
            let ay = a.matvec(&y);
            let mu = dot(&y, &ay);
            let res = ay.iter().zip(&y).map(|(p, v)| (p - mu * v).powi(2)).sum::<f64>().sqrt();
            let margin = 0.05 * width + 1e-6;
            if mu < lo - margin || mu > hi + margin {
                continue;
            }
            if res > (opts.residual_tol * mu.abs().max(1.0)).max(floor) {
                all_converged = false;
            }
            if mu >= lo - slack && mu <= hi + slack {
                pairs.push((mu, y, res));
            }
        }
        let count = pairs.len();
        if all_converged && prev_count == Some(count) {
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            return Ok(WindowEigen {
                values: pairs.iter().map(|p| p.0).collect(),
                residuals: pairs.iter().map(|p| p.2).collect(),
                vectors: pairs.into_iter().map(|p| p.1).collect(),
                krylov_dim: m,
            });
        }
        prev_count = if all_converged { Some(count) } else { None };
        if m >= max_dim {
            return Err(LinalgError::NoConvergence(m));
        }
    }
}

fn residual(a: &BandMatrix, mu: f64, v: &[f64]) -> f64 {
    let av = a.matvec(v);
    av.iter().zip(v).map(|(p, x)| (p - mu * x).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> BandMatrix {
        let mut a = BandMatrix::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn norm_inf_is_max_row_sum() {
        let a = laplacian(5);
        assert_eq!(a.norm_inf(), 4.0);
    }

    #[test]
    fn band_lu_solves_against_dense() {
        let n = 40;
        let mut a = BandMatrix::zeros(n, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..n {
            for j in i.saturating_sub(3)..=(i + 3).min(n - 1) {
                a.add(i, j, rng.random::<f64>() - 0.5);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = BandLu::factor(&a, 0.3).unwrap().solve(&b);
        let mut shifted = a.to_dense();
        for i in 0..n {
            shifted[(i, i)] -= 0.3;
        }
        let r = &shifted * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b);
        assert!(r.norm() < 1e-10, "residual {}", r.norm());
    }

    #[test]
    fn singular_shift_is_reported() {
        let mut a = BandMatrix::zeros(3, 0);
        a.add(0, 0, 1.0);
        a.add(1, 1, 2.0);
        a.add(2, 2, 3.0);
        assert!(matches!(BandLu::factor(&a, 2.0), Err(LinalgError::Singular(1))));
    }

    #[test]
    fn lanczos_window_matches_closed_form_spectrum() {
        // Eigenvalues of the Dirichlet Laplacian are 2 - 2cos(k pi/(n+1)).
        let n = 400;
        let a = laplacian(n);
        let (lo, hi) = (0.5, 0.7);
        let got = window_eigenpairs(&a, lo, hi, &LanczosOptions::default()).unwrap();
        let want: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .filter(|&l| l >= lo && l <= hi)
            .collect();
        assert_eq!(got.values.len(), want.len());
        for (g, w) in got.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
    }
}
