//! The explicit cylinder family u(s, t) = (α(s) + a₀, x₀, t, ρ(s)) in the
//! symplectization ℝ × T² × I, for the almost complex structure with
//! J∂ₐ = R, J∂θ = βV, V = -g∂ₓ + f∂_y.
//!
//! Writing ∂_y = gR + (g'/D)V gives J∂_y = -g∂ₐ - (g'/(βD))∂θ, so
//! ∂ₛu + J∂ₜu = 0 reduces to α' = g(ρ), ρ' = g'(ρ)/(β(ρ)D(ρ)).

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::ode::Dopri5;
use crate::profile::{Beta, ContactModel};
use crate::reeb::reeb_field;
use crate::torsion::TorsionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    /// s → +∞, ρ → 1/4.
    Plus,
    /// s → -∞, ρ → 3/4.
    Minus,
}

impl End {
    pub fn theta(self) -> f64 {
        match self {
            End::Plus => 0.25,
            End::Minus => 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderOptions {
    pub beta: Beta,
    pub rho_mid: f64,
    /// Explicit s-interval; chosen from `end_gap` when absent.
    pub s_range: Option<(f64, f64)>,
    pub points: usize,
    pub a0: f64,
    pub x0: f64,
    /// Automatic ranges stop once |ρ - θ_end| falls below this.
    pub end_gap: f64,
}

impl Default for CylinderOptions {
    fn default() -> Self {
        Self {
            beta: Beta::default(),
            rho_mid: 0.5,
            s_range: None,
            points: 2048,
            a0: 0.0,
            x0: 0.0,
            end_gap: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderSolution {
    pub s: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rho: Vec<f64>,
    pub a0: f64,
    pub x0: f64,
    pub rho_mid: f64,
    pub beta: Beta,
}

fn rhs(model: &ContactModel, beta: &Beta, rho: f64) -> [f64; 2] {
    let p = model.evaluate(rho);
    [p.g, p.dg / (beta.at(rho) * p.det())]
}

fn solver() -> Dopri5 {
    Dopri5::with_tolerances(1e-12, 1e-16)
}

/// Adaptive integration from s = 0 toward one end. Returns the accepted step
/// points (s, ρ), stopping once |ρ - θ_end| < gap or at `limit`.
fn trace(model: &ContactModel, opts: &CylinderOptions, end: End, limit: Option<f64>) -> Result<Vec<(f64, f64)>, TorsionError> {
    let target = end.theta();
    let bound = limit.unwrap_or(match end {
        End::Plus => 1e4,
        End::Minus => -1e4,
    });
    let mut pts = vec![(0.0, opts.rho_mid)];
    let mut reached = limit.is_some();
    let f = |_s: f64, y: &[f64; 2]| rhs(model, &opts.beta, y[1]);
    solver().integrate(f, 0.0, [0.0, opts.rho_mid], bound, |step| {
        pts.push((step.t1, step.y1[1]));
        if limit.is_none() && (step.y1[1] - target).abs() < opts.end_gap {
            reached = true;
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    })?;
    if !reached {
        return Err(TorsionError::InvalidArgument("cylinder does not reach its end".into()));
    }
    Ok(pts)
}

/// Cumulative turning of the Reeb direction over θ ∈ [0, 1], with the
/// turning rate replaced by its running maximum over a window as wide as the
/// turning region itself, so that the flanks of a corner are refined too.
fn dilated_turning(model: &ContactModel) -> Vec<f64> {
    const M: usize = 1 << 14;
    let rate: Vec<f64> = (0..=M)
        .map(|i| {
            let p = model.evaluate(i as f64 / M as f64);
            p.convexity().abs() / (p.df * p.df + p.dg * p.dg)
        })
        .collect();
    let total: f64 = rate.iter().sum::<f64>() / M as f64;
    let peak = rate.iter().cloned().fold(0.0, f64::max);
    let half = (total / peak.max(1e-300) * M as f64).ceil() as usize;
    let wide: Vec<f64> = (0..=M)
        .map(|i| rate[i.saturating_sub(half)..=(i + half).min(M)].iter().cloned().fold(0.0, f64::max))
        .collect();
    let mut cum = vec![0.0; M + 1];
    for i in 1..=M {
        cum[i] = cum[i - 1] + 0.5 * (wide[i - 1] + wide[i]) / M as f64;
    }
    cum
}

fn lookup(table: &[f64], theta: f64) -> f64 {
    let m = (table.len() - 1) as f64;
    let x = (theta.clamp(0.0, 1.0) * m).min(m - 1e-9);
    let i = x.floor() as usize;
    table[i] + (x - i as f64) * (table[i + 1] - table[i])
}

/// Grid of `n` points equidistributed in
/// ξ = (s - s₀)/L + |ρ - ρ(s₀)|/Δρ + |Ψ(ρ) - Ψ(ρ(s₀))|/ΔΨ, with Ψ the
/// dilated turning of the Reeb direction. The three terms resolve the slow
/// ends, the passage across the curve and its corners.
fn adapted_grid(model: &ContactModel, pts: &[(f64, f64)], n: usize) -> Vec<f64> {
    let table = dilated_turning(model);
    // Subdivide the step points so that corners crossed in one step are seen.
    let mut fine = Vec::with_capacity(16 * pts.len());
    for w in pts.windows(2) {
        for k in 0..16 {
            let u = k as f64 / 16.0;
            fine.push((w[0].0 + u * (w[1].0 - w[0].0), w[0].1 + u * (w[1].1 - w[0].1)));
        }
    }
    fine.push(pts[pts.len() - 1]);
    let pts = &fine[..];
    let (s0, r0) = pts[0];
    let (s1, r1) = pts[pts.len() - 1];
    let psi0 = lookup(&table, r0);
    let turn = (lookup(&table, r1) - psi0).abs().max(1e-300);
    let xi: Vec<f64> = pts
        .iter()
        .map(|&(s, r)| (s - s0) / (s1 - s0) + (r0 - r) / (r0 - r1) + (lookup(&table, r) - psi0).abs() / turn)
        .collect();
    let total = xi[xi.len() - 1];
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let target = total * k as f64 / (n - 1) as f64;
        while j + 2 < xi.len() && xi[j + 1] < target {
            j += 1;
        }
        let u = ((target - xi[j]) / (xi[j + 1] - xi[j])).clamp(0.0, 1.0);
        out.push(pts[j].0 + u * (pts[j + 1].0 - pts[j].0));
    }
    out[0] = s0;
    out[n - 1] = s1;
    out
}

pub fn cylinder_ode(model: &ContactModel, opts: &CylinderOptions) -> Result<CylinderSolution, TorsionError> {
    opts.beta.validate()?;
    if !(opts.rho_mid > 0.25 && opts.rho_mid < 0.75) {
        return Err(TorsionError::InvalidArgument("rho_mid must lie in (1/4, 3/4)".into()));
    }
    for theta in [0.25, 0.75] {
        let r = reeb_field(model, theta);
        if r.x.abs() > 1e-9 * r.y.abs() {
            return Err(TorsionError::InvalidArgument(
                "model has no vertical Reeb orbits at theta = 1/4, 3/4".into(),
            ));
        }
    }
    let (lo, hi) = match opts.s_range {
        Some((a, b)) if a <= 0.0 && b >= 0.0 => (Some(a), Some(b)),
        Some(_) => return Err(TorsionError::InvalidArgument("s_range must contain 0".into())),
        None => (None, None),
    };
    let s = if matches!(opts.s_range, Some((a, b)) if a == b) {
        vec![0.0]
    } else {
        let mut back = trace(model, opts, End::Minus, lo)?;
        let fwd = trace(model, opts, End::Plus, hi)?;
        back.reverse();
        back.pop();
        back.extend(fwd);
        adapted_grid(model, &back, opts.points.max(2))
    };
    let n = s.len();
    let mut alpha = vec![0.0; n];
    let mut rho = vec![0.0; n];
    let f = |_s: f64, y: &[f64; 2]| rhs(model, &opts.beta, y[1]);
    let split = s.partition_point(|&x| x < 0.0);
    let (mut t, mut y) = (0.0, [0.0, opts.rho_mid]);
    for i in split..n {
        y = solver().solve(f, t, y, s[i])?;
        t = s[i];
        alpha[i] = y[0];
        rho[i] = y[1];
    }
    let (mut t, mut y) = (0.0, [0.0, opts.rho_mid]);
    for i in (0..split).rev() {
        y = solver().solve(f, t, y, s[i])?;
        t = s[i];
        alpha[i] = y[0];
        rho[i] = y[1];
    }
    if rho.iter().any(|r| !r.is_finite()) {
        return Err(TorsionError::InvalidArgument("cylinder integration blew up".into()));
    }
    Ok(CylinderSolution {
        s,
        alpha,
        rho,
        a0: opts.a0,
        x0: opts.x0,
        rho_mid: opts.rho_mid,
        beta: opts.beta,
    })
}

/// Finite-difference weights for the first derivative at `x0` (Fornberg).
fn fd_weights(nodes: &[f64], x0: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Derivative of samples with 9-point stencils.
fn differentiate(s: &[f64], v: &[f64]) -> Vec<f64> {
    let n = s.len();
    let width = n.min(9);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let nodes = &s[start..start + width];
            fd_weights(nodes, s[i])
                .iter()
                .zip(&v[start..start + width])
                .map(|(w, x)| w * x)
                .sum()
        })
        .collect()
}

/// J at height θ in coordinates (a, x, y, θ).
pub fn complex_structure(model: &ContactModel, beta: &Beta, theta: f64) -> Matrix4<f64> {
    let p = model.evaluate(theta);
    let r = reeb_field(model, theta);
    let b = beta.at(theta);
    let da = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let reeb = Vector4::new(0.0, r.x, r.y, 0.0);
    let dt = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let v = Vector4::new(0.0, -p.g, p.f, 0.0);
    let basis = Matrix4::from_columns(&[da, reeb, dt, v]);
    let image = Matrix4::from_columns(&[reeb, -da, v * b, -dt / b]);
    image * basis.try_inverse().expect("frame (d_a, R, d_theta, V) is a basis")
}

/// sup over the (s, t) grid of |∂ₛu + J(u)∂ₜu| for the full map u. Neither
/// J(u) nor the derivatives of u depend on t, so one row per s suffices.
pub fn cr_residual(sol: &CylinderSolution, model: &ContactModel, beta: &Beta) -> f64 {
    let n = sol.s.len();
    if n < 2 || sol.s[n - 1] == sol.s[0] {
        return 0.0;
    }
    let a: Vec<f64> = sol.alpha.iter().map(|x| x + sol.a0).collect();
    let da = differentiate(&sol.s, &a);
    let dr = differentiate(&sol.s, &sol.rho);
    let dt = Vector4::new(0.0, 0.0, 1.0, 0.0);
    (0..n)
        .map(|i| {
            let j = complex_structure(model, beta, sol.rho[i]);
            let ds = Vector4::new(da[i], 0.0, 0.0, dr[i]);
            (ds + j * dt).norm()
        })
        .fold(0.0, f64::max)
}

/// Integrand of u*dλ per unit s, g'(ρ)ρ'.
fn energy_density(model: &ContactModel, beta: &Beta, rho: f64) -> f64 {
    let p = model.evaluate(rho);
    p.dg * p.dg / (beta.at(rho) * p.det())
}

/// s where ρ first crosses `level`, by linear interpolation.
fn crossing(sol: &CylinderSolution, level: f64) -> Option<(usize, f64)> {
    sol.rho.windows(2).enumerate().find_map(|(i, w)| {
        if (w[0] - level) * (w[1] - level) <= 0.0 && w[0] != w[1] {
            let u = (w[0] - level) / (w[0] - w[1]);
            Some((i, sol.s[i] + u * (sol.s[i + 1] - sol.s[i])))
        } else {
            None
        }
    })
}

fn truncated_energy(sol: &CylinderSolution, model: &ContactModel, delta: f64) -> Result<f64, TorsionError> {
    let (ia, sa) = crossing(sol, 0.75 - delta)
        .ok_or_else(|| TorsionError::InvalidArgument(format!("solution does not reach 3/4 - {delta}")))?;
    let (ib, sb) = crossing(sol, 0.25 + delta)
        .ok_or_else(|| TorsionError::InvalidArgument(format!("solution does not reach 1/4 + {delta}")))?;
    let w = |i: usize| energy_density(model, &sol.beta, sol.rho[i]);
    let first = ia + 1;
    let last = ib;
    let mut e = 0.0;
    // End pieces.
    let wa = energy_density(model, &sol.beta, 0.75 - delta);
    let wb = energy_density(model, &sol.beta, 0.25 + delta);
    e += 0.5 * (wa + w(first)) * (sol.s[first] - sa);
    e += 0.5 * (w(last) + wb) * (sb - sol.s[last]);
    // Composite Simpson for uneven spacing, trapezoid on a leftover interval.
    let mut k = first;
    while k + 2 <= last {
        let (h0, h1) = (sol.s[k + 1] - sol.s[k], sol.s[k + 2] - sol.s[k + 1]);
        let hs = h0 + h1;
        e += hs / 6.0 * ((2.0 - h1 / h0) * w(k) + hs * hs / (h0 * h1) * w(k + 1) + (2.0 - h0 / h1) * w(k + 2));
        k += 2;
    }
    if k < last {
        e += 0.5 * (sol.s[last] - sol.s[k]) * (w(k) + w(last));
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub delta: f64,
    pub truncated: f64,
    pub truncated_double: f64,
    pub extrapolated: f64,
}

/// ∫ u*dλ over the part of the cylinder with ρ ∈ (1/4 + δ, 3/4 - δ),
/// extrapolated to δ → 0 (the truncation error is O(δ²)).
pub fn dlambda_energy(sol: &CylinderSolution, model: &ContactModel, delta: f64) -> Result<EnergyEstimate, TorsionError> {
    if !(delta > 0.0 && delta < 0.125) {
        return Err(TorsionError::InvalidArgument("delta must lie in (0, 1/8)".into()));
    }
    let e1 = truncated_energy(sol, model, delta)?;
    let e2 = truncated_energy(sol, model, 2.0 * delta)?;
    Ok(EnergyEstimate {
        delta,
        truncated: e1,
        truncated_double: e2,
        extrapolated: (4.0 * e1 - e2) / 3.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub end: End,
    /// Slope of log|ρ - θ_end| in s.
    pub rate: f64,
    pub samples: usize,
    pub max_log_deviation: f64,
}

pub fn decay_rate(sol: &CylinderSolution, end: End) -> Result<DecayFit, TorsionError> {
    let target = end.theta();
    let pts: Vec<(f64, f64)> = sol
        .s
        .iter()
        .zip(&sol.rho)
        .filter_map(|(&s, &r)| {
            let d = (r - target).abs();
            let toward = match end {
                End::Plus => s > 0.0,
                End::Minus => s < 0.0,
            };
            (toward && (1e-8..=1e-4).contains(&d)).then(|| (s, d.ln()))
        })
        .collect();
    if pts.len() < 4 {
        return Err(TorsionError::FitFailure(format!(
            "only {} samples with |rho - {target}| in [1e-8, 1e-4]",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    let rate = sxy / sxx;
    let dev = pts
        .iter()
        .map(|p| (p.1 - (my + rate * (p.0 - mx))).abs())
        .fold(0.0, f64::max);
    if dev > 0.1 {
        return Err(TorsionError::FitFailure(format!("log-linear residual {dev} exceeds 0.1")));
    }
    Ok(DecayFit {
        end,
        rate,
        samples: pts.len(),
        max_log_deviation: dev,
    })
}

/// g''/(βD) at the end torus: the rate of the linearized ODE there.
pub fn linearized_decay_rate(model: &ContactModel, beta: &Beta, end: End) -> f64 {
    let p = model.evaluate(end.theta());
    p.ddg / (beta.at(end.theta()) * p.det())
}
