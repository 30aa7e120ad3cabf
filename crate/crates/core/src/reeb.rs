//! Reeb vector field, invariant tori and linearized return maps.

use std::f64::consts::{PI, TAU};
use std::ops::ControlFlow;

use nalgebra::{Matrix2, Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ode::{Dopri5, OdeError};
use crate::profile::{ContactModel, CurvePoint};

/// Tolerance on |2 - tr| below which a return map counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Entries of M - I below this are treated as zero.
pub const IDENTITY_TOL: f64 = 1e-9;
pub const CLOSURE_TOL: f64 = 1e-7;
/// Closures before this time are the trivial return to the start.
pub const MIN_CLOSURE_TIME: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReebError {
    #[error("profile curve is not convex near theta = {0}: direction of the Reeb field does not turn monotonically")]
    NonConvex(f64),
    #[error("Reeb direction undersampled near theta = {0}; increase grid_size")]
    Undersampled(f64),
    #[error("sign convention check failed at theta = {theta}: p f + q g = {signed}, |p f| + |q g| = {unsigned}")]
    SignConvention { theta: f64, signed: f64, unsigned: f64 },
    #[error("q_max must be at least 1")]
    InvalidQmax,
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReebVector {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// R = (g'/D, -f'/D, 0).
pub fn reeb_field(model: &ContactModel, theta: f64) -> ReebVector {
    reeb_from_point(&model.evaluate(theta))
}

fn reeb_from_point(p: &CurvePoint) -> ReebVector {
    let d = p.det();
    ReebVector {
        x: p.dg / d,
        y: -p.df / d,
        theta: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    MorseBott,
    Nondegenerate,
    Degenerate,
    Irrational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantTorus {
    pub theta: f64,
    pub p: i64,
    pub q: i64,
    /// p/q; infinite when q = 0 (serialized as null).
    pub slope: f64,
    pub period: f64,
    pub classification: Classification,
}

/// Farey sequence of order `n`: reduced fractions a/b in [0, 1] with b ≤ n,
/// in increasing order.
pub fn farey(n: u32) -> Vec<(u32, u32)> {
    let mut out = vec![(0, 1)];
    if n == 0 {
        return out;
    }
    let (mut a, mut b, mut c, mut d) = (0u32, 1u32, 1u32, n);
    while c <= n {
        out.push((c, d));
        let k = (n + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
    }
    out
}

/// All primitive integer vectors (p, q) with max(|p|, |q|) ≤ qmax, ordered by
/// angle in [0, 2π).
pub fn primitive_directions(qmax: u32) -> Vec<(i64, i64)> {
    let mut v: Vec<(i64, i64)> = Vec::new();
    for (a, b) in farey(qmax) {
        let (a, b) = (a as i64, b as i64);
        // (b, a) lies in the first octant 0 ≤ q ≤ p; reflect to the other seven.
        let images = [(b, a), (a, b), (-a, b), (-b, a), (-b, -a), (-a, -b), (a, -b), (b, -a)];
        v.extend(images);
    }
    v.sort_by(|x, y| angle_of(*x).total_cmp(&angle_of(*y)));
    v.dedup();
    v
}

fn angle_of((p, q): (i64, i64)) -> f64 {
    (q as f64).atan2(p as f64).rem_euclid(TAU)
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

fn raw_angle(model: &ContactModel, theta: f64) -> f64 {
    let p = model.evaluate(theta);
    (-p.df).atan2(p.dg)
}

/// Unwrapped direction angle of the Reeb field on the model grid, θ_j = j/M
/// for j = 0..=M. Errors if the angle does not strictly increase.
pub fn direction_angles(model: &ContactModel) -> Result<Vec<f64>, ReebError> {
    let m = model.curve.grid_size();
    let mut out = Vec::with_capacity(m + 1);
    let mut prev = raw_angle(model, 0.0);
    out.push(prev);
    for j in 1..=m {
        let theta = j as f64 / m as f64;
        let inc = wrap(raw_angle(model, theta) - prev);
        if inc <= 0.0 {
            return Err(ReebError::NonConvex(theta));
        }
        if inc > 0.5 * PI {
            return Err(ReebError::Undersampled(theta));
        }
        prev += inc;
        out.push(prev);
    }
    Ok(out)
}

/// Invariant tori whose Reeb slope is a primitive direction with
/// max(|p|, |q|) ≤ qmax, sorted by θ.
pub fn rational_tori(model: &ContactModel, qmax: u32) -> Result<Vec<InvariantTorus>, ReebError> {
    if qmax == 0 {
        return Err(ReebError::InvalidQmax);
    }
    let angles = direction_angles(model)?;
    let m = angles.len() - 1;
    let (lo, hi) = (angles[0], angles[m]);
    let dirs = primitive_directions(qmax);

    let mut targets: Vec<(f64, (i64, i64))> = Vec::new();
    for &dir in &dirs {
        let a = angle_of(dir);
        let mut k = ((lo - a) / TAU).ceil();
        loop {
            let t = a + k * TAU;
            if t >= hi {
                break;
            }
            if t >= lo {
                targets.push((t, dir));
            }
            k += 1.0;
        }
    }

    let symmetric = model.curve.is_symmetric();
    let mut tori = targets
        .par_iter()
        .map(|&(target, (p, q))| {
            let cell = angles.partition_point(|&x| x <= target).saturating_sub(1).min(m - 1);
            let theta = solve_angle(model, &angles, cell, target);
            let pt = model.evaluate(theta);
            let period = p as f64 * pt.f + q as f64 * pt.g;
            if symmetric {
                let unsigned = (p as f64 * pt.f).abs() + (q as f64 * pt.g).abs();
                if (unsigned - period).abs() > 1e-9 * unsigned.max(1.0) {
                    return Err(ReebError::SignConvention {
                        theta,
                        signed: period,
                        unsigned,
                    });
                }
            }
            let mut torus = InvariantTorus {
                theta,
                p,
                q,
                slope: if q == 0 { f64::INFINITY } else { p as f64 / q as f64 },
                period,
                classification: Classification::Degenerate,
            };
            let mono = linearized_return_map(model, &torus)?;
            torus.classification = classify_map(&mono, pt.convexity());
            Ok(torus)
        })
        .collect::<Result<Vec<_>, _>>()?;
    tori.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(tori)
}

/// Root of (unwrapped angle - target) in grid cell `cell`.
fn solve_angle(model: &ContactModel, angles: &[f64], cell: usize, target: f64) -> f64 {
    let m = (angles.len() - 1) as f64;
    let mut a = cell as f64 / m;
    let mut b = (cell + 1) as f64 / m;
    let anchor = angles[cell];
    let eval = |t: f64| anchor + wrap(raw_angle(model, t) - anchor) - target;
    let mut fa = angles[cell] - target;
    let mut fb = angles[cell + 1] - target;
    if fa == 0.0 {
        return a;
    }
    // Illinois variant of regula falsi.
    let mut side = 0i32;
    for _ in 0..200 {
        let c = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
        let c = if c > a && c < b { c } else { 0.5 * (a + b) };
        let fc = eval(c);
        if fc == 0.0 || (b - a) < 1e-16 {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a) < 4.0 * f64::EPSILON * b.max(1e-3) {
            break;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Jacobian of the Reeb field at θ in coordinates (x, y, θ).
fn reeb_jacobian(p: &CurvePoint) -> Matrix3<f64> {
    let d = p.det();
    let dd = p.det_prime();
    let da = (p.ddg * d - p.dg * dd) / (d * d);
    let db = (-p.ddf * d + p.df * dd) / (d * d);
    Matrix3::new(0.0, 0.0, da, 0.0, 0.0, db, 0.0, 0.0, 0.0)
}

/// Solves the variational equation along the orbit through θ for time `t`
/// and returns the full 3×3 linearized flow.
pub fn linearized_flow(model: &ContactModel, theta: f64, time: f64) -> Result<Matrix3<f64>, ReebError> {
    if time == 0.0 {
        return Ok(Matrix3::identity());
    }
    let p = model.evaluate(theta);
    let r = reeb_from_point(&p);
    let jac = reeb_jacobian(&p);
    let mut y0 = [0.0; 12];
    y0[2] = theta;
    for i in 0..3 {
        y0[3 + 4 * i] = 1.0;
    }
    let rhs = |_t: f64, y: &[f64; 12]| {
        let q = model.evaluate(y[2]);
        let rv = reeb_from_point(&q);
        let j = if y[2] == theta { jac } else { reeb_jacobian(&q) };
        let phi = Matrix3::from_row_slice(&y[3..]);
        let dphi = j * phi;
        let mut out = [0.0; 12];
        out[0] = rv.x;
        out[1] = rv.y;
        out[2] = rv.theta;
        out[3..].copy_from_slice(dphi.transpose().as_slice());
        out
    };
    let speed = (r.x * r.x + r.y * r.y).sqrt().max(1e-12);
    let end = Dopri5::with_tolerances(1e-12, 1e-14)
        .with_max_step(0.5 / speed)
        .solve(rhs, 0.0, y0, time)?;
    Ok(Matrix3::from_row_slice(&end[3..]))
}

/// Return map on the transverse frame (∂θ, V), V = (-g, f, 0), after
/// projecting along the Reeb direction.
pub fn linearized_return_map(model: &ContactModel, torus: &InvariantTorus) -> Result<Matrix2<f64>, ReebError> {
    monodromy(model, torus.theta, torus.period)
}

pub fn monodromy(model: &ContactModel, theta: f64, time: f64) -> Result<Matrix2<f64>, ReebError> {
    let phi = linearized_flow(model, theta, time)?;
    let p = model.evaluate(theta);
    let r = reeb_from_point(&p);
    let basis = Matrix3::from_columns(&[
        Vector3::new(r.x, r.y, 0.0),
        Vector3::new(0.0, 0.0, 1.0),
        Vector3::new(-p.g, p.f, 0.0),
    ]);
    let inv = basis
        .try_inverse()
        .ok_or_else(|| ReebError::InvalidArgument("degenerate transverse frame".into()))?;
    let images = inv * phi * basis;
    Ok(Matrix2::new(images[(1, 1)], images[(1, 2)], images[(2, 1)], images[(2, 2)]))
}

/// Classifies a linearized return map; `convexity` is γ' ∧ γ'' at the torus.
pub fn classify_map(m: &Matrix2<f64>, convexity: f64) -> Classification {
    let tr = m.trace();
    let off = (m - Matrix2::identity()).abs().max();
    if (2.0 - tr).abs() > DEGENERACY_TOL {
        return Classification::Nondegenerate;
    }
    if off <= IDENTITY_TOL || convexity.abs() <= 1e-12 {
        return Classification::Degenerate;
    }
    // Unipotent shear: every cover must stay a nontrivial shear.
    let mut power = *m;
    for _ in 1..3 {
        power *= m;
        if ((power - Matrix2::identity()).abs().max() <= IDENTITY_TOL) || (2.0 - power.trace()).abs() > 1e-8 {
            return Classification::Degenerate;
        }
    }
    Classification::MorseBott
}

/// Classifies the orbit family through θ whether or not its slope is rational.
pub fn classify_theta(model: &ContactModel, theta: f64, qmax: u32) -> Result<(Classification, Option<(i64, i64)>), ReebError> {
    let r = reeb_field(model, theta);
    let scale = r.x.abs().max(r.y.abs());
    for (p, q) in primitive_directions(qmax) {
        let cross = r.x * q as f64 - r.y * p as f64;
        let dot = r.x * p as f64 + r.y * q as f64;
        if dot > 0.0 && cross.abs() <= 1e-12 * scale * (p.abs().max(q.abs()) as f64) {
            let pt = model.evaluate(theta);
            let period = p as f64 * pt.f + q as f64 * pt.g;
            let m = monodromy(model, theta, period)?;
            return Ok((classify_map(&m, pt.convexity()), Some((p, q))));
        }
    }
    Ok((Classification::Irrational, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Closure {
    Closed {
        period: f64,
        homology: (i64, i64),
        defect: f64,
    },
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Accepted step times.
    pub times: Vec<f64>,
    /// Lifted positions (x, y, θ) in the universal cover.
    pub points: Vec<[f64; 3]>,
    pub closure: Closure,
}

/// Integrates the Reeb flow from `start` up to `horizon`, stopping at the
/// first return to the starting point in T² × I.
pub fn integrate_orbit(model: &ContactModel, start: [f64; 3], horizon: f64, rtol: f64) -> Result<Trajectory, ReebError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(ReebError::InvalidArgument("horizon must be positive".into()));
    }
    let r0 = reeb_field(model, start[2]);
    let speed = (r0.x * r0.x + r0.y * r0.y).sqrt().max(1e-12);
    let mut times = vec![0.0];
    let mut points = vec![start];
    let mut closure = Closure::Open;
    let rhs = |_t: f64, y: &[f64; 3]| {
        let r = reeb_field(model, y[2]);
        [r.x, r.y, r.theta]
    };
    Dopri5::with_tolerances(rtol, rtol * 1e-2)
        .with_max_step(0.5 / speed)
        .integrate(rhs, 0.0, start, horizon, |step| {
            times.push(step.t1);
            points.push(step.y1);
            match detect_closure(step, &start) {
                Some(c) => {
                    closure = c;
                    ControlFlow::Break(())
                }
                None => ControlFlow::Continue(()),
            }
        })?;
    Ok(Trajectory { times, points, closure })
}

fn detect_closure(step: &crate::ode::Step<3>, start: &[f64; 3]) -> Option<Closure> {
    let disp = |y: &[f64; 3]| [y[0] - start[0], y[1] - start[1]];
    let d0 = disp(&step.y0);
    let d1 = disp(&step.y1);
    let dm = disp(&step.interpolate(0.5 * (step.t0 + step.t1)).0);
    let mut candidates: Vec<(i64, i64)> = [d0, dm, d1]
        .iter()
        .map(|d| (d[0].round() as i64, d[1].round() as i64))
        .collect();
    candidates.sort();
    candidates.dedup();
    let mut best: Option<(f64, f64, (i64, i64))> = None;
    for lat in candidates {
        let target = [lat.0 as f64, lat.1 as f64];
        let h = step.t1 - step.t0;
        let v = [(d1[0] - d0[0]) / h, (d1[1] - d0[1]) / h];
        let vv = v[0] * v[0] + v[1] * v[1];
        let mut t = if vv > 0.0 {
            step.t0 + (((target[0] - d0[0]) * v[0] + (target[1] - d0[1]) * v[1]) / vv).clamp(0.0, h)
        } else {
            step.t0
        };
        for _ in 0..8 {
            let (y, dy) = step.interpolate(t);
            let e = [y[0] - start[0] - target[0], y[1] - start[1] - target[1]];
            let g = e[0] * dy[0] + e[1] * dy[1];
            let gg = dy[0] * dy[0] + dy[1] * dy[1];
            if gg == 0.0 {
                break;
            }
            t = (t - g / gg).clamp(step.t0, step.t1);
        }
        let (y, _) = step.interpolate(t);
        let dist = ((y[0] - start[0] - target[0]).powi(2)
            + (y[1] - start[1] - target[1]).powi(2)
            + (y[2] - start[2]).powi(2))
        .sqrt();
        if t > MIN_CLOSURE_TIME && dist < CLOSURE_TOL && best.is_none_or(|b| t < b.0) {
            best = Some((t, dist, lat));
        }
    }
    best.map(|(t, dist, lat)| Closure::Closed {
        period: t,
        homology: lat,
        defect: dist,
    })
}
