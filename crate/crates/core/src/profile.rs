//! Profile curves γ(θ) = (f(θ), g(θ)) and the contact models built from them.
//!
//! A model lives on T² × I with coordinates (x, y, θ) and contact form
//! α = f(θ) dx + g(θ) dy. All representations used here are radial,
//! γ(θ) = h(θ) e^{2πiθ}, except the tight tori which are given directly.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_GRID: usize = 4096;
pub const CONTACT_MARGIN: f64 = 1e-12;
pub const PERIODICITY_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("construction failed: {0}")]
    ConstructionFailure(String),
    #[error("curve is not contact: min D = {min_d:e} at theta = {theta}")]
    NotContact { min_d: f64, theta: f64 },
}

/// Value and first two θ-derivatives of a profile curve at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub theta: f64,
    pub f: f64,
    pub g: f64,
    pub df: f64,
    pub dg: f64,
    pub ddf: f64,
    pub ddg: f64,
}

impl CurvePoint {
    /// The contact determinant D = f g' - f' g.
    pub fn det(&self) -> f64 {
        self.f * self.dg - self.df * self.g
    }

    /// γ' ∧ γ'' = f' g'' - f'' g'.
    pub fn convexity(&self) -> f64 {
        self.df * self.ddg - self.ddf * self.dg
    }

    /// θ-derivative of D.
    pub fn det_prime(&self) -> f64 {
        self.f * self.ddg - self.ddf * self.g
    }
}

/// Which |trig| function the gauge ramp acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Axis {
    Sin,
    Cos,
}

/// Radial function h = 1/u with u(φ) = base + gain · R(|trig φ| - knee),
/// where R is a smooth convex ramp that is 0 left of the knee and linear right of it,
/// smoothed over [knee - blend, knee + blend].
#[derive(Debug, Clone, Copy, PartialEq)]
struct Gauge {
    axis: Axis,
    base: f64,
    gain: f64,
    knee: f64,
    blend: f64,
}

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 48;
        (0..n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 1.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// C^∞ step 1/(1 + e^{1/x - 1/(1-x)}) on (0, 1) and its derivative.
fn smooth_step(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let z = 1.0 / x - 1.0 / (1.0 - x);
    let s = 1.0 / (1.0 + z.exp());
    (s, s * (1.0 - s) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x))))
}

/// ∫₀ˣ of the smooth step for x in [0, 1/2].
fn step_integral_half(x: f64) -> f64 {
    gauss_legendre()
        .iter()
        .map(|&(t, w)| w * smooth_step(x * t).0)
        .sum::<f64>()
        * x
}

/// (R, R', R'') for the ramp R(t): zero for t ≤ -w, equal to t for t ≥ w,
/// convex and C^∞ in between.
fn ramp(t: f64, w: f64) -> (f64, f64, f64) {
    let x = (t + w) / (2.0 * w);
    if x <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if x >= 1.0 {
        (t, 1.0, 0.0)
    } else {
        // S(x) + S(1 - x) = 1 gives ∫₀ˣ S = x - 1/2 + ∫₀^{1-x} S for x > 1/2.
        let integral = if x <= 0.5 {
            step_integral_half(x)
        } else {
            x - 0.5 + step_integral_half(1.0 - x)
        };
        let (step, dstep) = smooth_step(x);
        (2.0 * w * integral, step, dstep / (2.0 * w))
    }
}

impl Gauge {
    /// (h, dh/dφ, d²h/dφ²).
    fn radial_phi(&self, phi: f64) -> (f64, f64, f64) {
        let (sn, cs) = phi.sin_cos();
        let (s, ds) = match self.axis {
            Axis::Sin => (sn.abs(), sn.signum() * cs),
            Axis::Cos => (cs.abs(), -cs.signum() * sn),
        };
        let dds = -s;
        let (r, dr, ddr) = ramp(s - self.knee, self.blend);
        let u = self.base + self.gain * r;
        let du = self.gain * dr * ds;
        let ddu = self.gain * (ddr * ds * ds + dr * dds);
        let h = 1.0 / u;
        let dh = -du / (u * u);
        let ddh = -ddu / (u * u) + 2.0 * du * du / (u * u * u);
        (h, dh, ddh)
    }
}

/// Periodic cubic spline through uniform samples on [0, 1).
#[derive(Debug, Clone, PartialEq)]
struct PeriodicSpline {
    y: Vec<f64>,
    m: Vec<f64>,
}

impl PeriodicSpline {
    fn new(y: Vec<f64>) -> Self {
        let n = y.len();
        let dx = 1.0 / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|i| 6.0 * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]) / (dx * dx))
            .collect();
        let m = solve_cyclic(1.0, 4.0, 1.0, &rhs);
        Self { y, m }
    }

    fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let dx = 1.0 / n as f64;
        let pos = theta.rem_euclid(1.0) * n as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let j = (i + 1) % n;
        let b = pos - i as f64;
        let a = 1.0 - b;
        let (yi, yj, mi, mj) = (self.y[i], self.y[j], self.m[i], self.m[j]);
        let v = a * yi + b * yj + ((a * a * a - a) * mi + (b * b * b - b) * mj) * dx * dx / 6.0;
        let d = (yj - yi) / dx - (3.0 * a * a - 1.0) / 6.0 * dx * mi + (3.0 * b * b - 1.0) / 6.0 * dx * mj;
        let dd = a * mi + b * mj;
        (v, d, dd)
    }
}

/// Solves the cyclic tridiagonal system with constant bands (lower, diag, upper).
fn solve_cyclic(lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    if n == 1 {
        return vec![rhs[0] / (diag + lower + upper)];
    }
    if n == 2 {
        let (a, b) = (diag, lower + upper);
        let det = a * a - b * b;
        return vec![(a * rhs[0] - b * rhs[1]) / det, (a * rhs[1] - b * rhs[0]) / det];
    }
    // Sherman–Morrison on the corner entries.
    let gamma = -diag;
    let mut bdiag = vec![diag; n];
    bdiag[0] = diag - gamma;
    bdiag[n - 1] = diag - lower * upper / gamma;
    let thomas = |d: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = upper / bdiag[0];
        x[0] = d[0] / bdiag[0];
        for i in 1..n {
            let den = bdiag[i] - lower * c[i - 1];
            c[i] = upper / den;
            x[i] = (d[i] - lower * x[i - 1]) / den;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };
    let x = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = lower;
    let zz = thomas(&u);
    let fact = (x[0] + upper * x[n - 1] / gamma) / (1.0 + zz[0] + upper * zz[n - 1] / gamma);
    x.iter().zip(&zz).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Serializable description of a profile curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// (cos 2πnθ, sin 2πnθ).
    Tight { n: u32 },
    /// Symmetric convex oval with width ε along the y-axis, unit arcs near
    /// θ = 0 and 1/2. `shoulder` is the knee position as a fraction of ε.
    Oval {
        epsilon: f64,
        #[serde(default = "default_shoulder")]
        shoulder: f64,
    },
    /// Closed curve with straight segments on the lines x = ±knee.
    FlatSided {
        knee: f64,
        #[serde(default = "default_blend")]
        blend: f64,
    },
    /// h(θ) = a₀ + Σ a_k cos 2πkθ + b_k sin 2πkθ, k ≥ 1.
    Fourier {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// h sampled at θ_j = j/M, interpolated by a periodic cubic spline.
    Sampled { h_samples: Vec<f64> },
}

fn default_shoulder() -> f64 {
    0.5
}

fn default_blend() -> f64 {
    0.05
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurveDocument {
    #[serde(flatten)]
    shape: Shape,
    #[serde(default = "default_grid")]
    grid_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Evaluator {
    Tight(f64),
    Gauge(Gauge),
    Fourier { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
    Spline(PeriodicSpline),
}

/// A closed planar curve sampled for validation on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveDocument", into = "CurveDocument")]
pub struct ProfileCurve {
    shape: Shape,
    grid_size: usize,
    symmetric: bool,
    eval: Evaluator,
}

impl TryFrom<CurveDocument> for ProfileCurve {
    type Error = ProfileError;
    fn try_from(doc: CurveDocument) -> Result<Self, Self::Error> {
        Self::new(doc.shape, doc.grid_size)
    }
}

impl From<ProfileCurve> for CurveDocument {
    fn from(c: ProfileCurve) -> Self {
        CurveDocument {
            shape: c.shape,
            grid_size: c.grid_size,
        }
    }
}

fn check_finite(name: &str, v: f64) -> Result<(), ProfileError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ProfileError::InvalidParameter(format!("{name} must be finite")))
    }
}

impl ProfileCurve {
    pub fn new(shape: Shape, grid_size: usize) -> Result<Self, ProfileError> {
        if grid_size < 8 {
            return Err(ProfileError::InvalidParameter("grid_size must be at least 8".into()));
        }
        let eval = match &shape {
            Shape::Tight { n } => {
                if *n == 0 {
                    return Err(ProfileError::InvalidParameter("tight torus needs n >= 1".into()));
                }
                Evaluator::Tight(TAU * *n as f64)
            }
            Shape::Oval { epsilon, shoulder } => {
                check_finite("epsilon", *epsilon)?;
                check_finite("shoulder", *shoulder)?;
                if !(*epsilon > 0.0 && *epsilon < 0.25) {
                    return Err(ProfileError::InvalidParameter(format!(
                        "epsilon must lie in (0, 1/4), got {epsilon}"
                    )));
                }
                if !(*shoulder > 0.0 && *shoulder < 1.0) {
                    return Err(ProfileError::ConstructionFailure(format!(
                        "shoulder must lie in (0, 1) to keep the oval convex, got {shoulder}"
                    )));
                }
                let knee = shoulder * epsilon;
                Evaluator::Gauge(Gauge {
                    axis: Axis::Sin,
                    base: 1.0,
                    gain: (1.0 / epsilon - 1.0) / (1.0 - knee),
                    knee,
                    blend: 0.5 * knee,
                })
            }
            Shape::FlatSided { knee, blend } => {
                check_finite("knee", *knee)?;
                check_finite("blend", *blend)?;
                if !(*blend > 0.0 && knee - blend > 0.0 && knee + blend < 1.0) {
                    return Err(ProfileError::InvalidParameter(
                        "flat-sided curve needs 0 < knee - blend and knee + blend < 1".into(),
                    ));
                }
                Evaluator::Gauge(Gauge {
                    axis: Axis::Cos,
                    base: *knee,
                    gain: 1.0,
                    knee: *knee,
                    blend: *blend,
                })
            }
            Shape::Fourier { a0, cos, sin } => {
                check_finite("a0", *a0)?;
                if cos.iter().chain(sin).any(|v| !v.is_finite()) {
                    return Err(ProfileError::InvalidParameter("Fourier coefficients must be finite".into()));
                }
                Evaluator::Fourier {
                    a0: *a0,
                    cos: cos.clone(),
                    sin: sin.clone(),
                }
            }
            Shape::Sampled { h_samples } => {
                if h_samples.len() < 4 {
                    return Err(ProfileError::InvalidParameter("need at least 4 samples of h".into()));
                }
                if h_samples.iter().any(|v| !v.is_finite()) {
                    return Err(ProfileError::InvalidParameter("samples of h must be finite".into()));
                }
                Evaluator::Spline(PeriodicSpline::new(h_samples.clone()))
            }
        };
        let mut curve = Self {
            shape,
            grid_size,
            symmetric: false,
            eval,
        };
        curve.symmetric = curve.symmetry_defect() <= SYMMETRY_TOL;
        Ok(curve)
    }

    pub fn tight(n: u32) -> Result<Self, ProfileError> {
        Self::new(Shape::Tight { n }, DEFAULT_GRID)
    }

    pub fn fourier(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self, ProfileError> {
        Self::new(Shape::Fourier { a0, cos, sin }, DEFAULT_GRID)
    }

    pub fn circle() -> Self {
        Self::fourier(1.0, vec![], vec![]).expect("unit circle")
    }

    pub fn flat_sided(knee: f64, blend: f64) -> Result<Self, ProfileError> {
        Self::new(Shape::FlatSided { knee, blend }, DEFAULT_GRID)
    }

    pub fn sampled(h_samples: Vec<f64>) -> Result<Self, ProfileError> {
        Self::new(Shape::Sampled { h_samples }, DEFAULT_GRID)
    }

    pub fn with_grid(mut self, grid_size: usize) -> Result<Self, ProfileError> {
        if grid_size < 8 {
            return Err(ProfileError::InvalidParameter("grid_size must be at least 8".into()));
        }
        self.grid_size = grid_size;
        Ok(self)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Width parameter for ovals.
    pub fn epsilon(&self) -> Option<f64> {
        match self.shape {
            Shape::Oval { epsilon, .. } => Some(epsilon),
            _ => None,
        }
    }

    /// Rotation number of γ around the origin (n for the tight torus ξₙ).
    pub fn turns(&self) -> u32 {
        match self.shape {
            Shape::Tight { n } => n,
            _ => 1,
        }
    }

    fn radial(&self, theta: f64) -> (f64, f64, f64) {
        match &self.eval {
            Evaluator::Tight(_) => (1.0, 0.0, 0.0),
            Evaluator::Gauge(gauge) => {
                let (h, dh, ddh) = gauge.radial_phi(TAU * theta);
                (h, TAU * dh, TAU * TAU * ddh)
            }
            Evaluator::Fourier { a0, cos, sin } => {
                let mut h = *a0;
                let mut dh = 0.0;
                let mut ddh = 0.0;
                let terms = cos.len().max(sin.len());
                for k in 1..=terms {
                    let a = cos.get(k - 1).copied().unwrap_or(0.0);
                    let b = sin.get(k - 1).copied().unwrap_or(0.0);
                    let w = TAU * k as f64;
                    let (s, c) = (w * theta).sin_cos();
                    h += a * c + b * s;
                    dh += w * (-a * s + b * c);
                    ddh -= w * w * (a * c + b * s);
                }
                (h, dh, ddh)
            }
            Evaluator::Spline(sp) => sp.eval(theta),
        }
    }

    /// Evaluates γ and its derivatives at θ without reducing θ mod 1.
    pub fn evaluate_unreduced(&self, theta: f64) -> CurvePoint {
        if let Evaluator::Tight(w) = self.eval {
            let (s, c) = (w * theta).sin_cos();
            return CurvePoint {
                theta,
                f: c,
                g: s,
                df: -w * s,
                dg: w * c,
                ddf: -w * w * c,
                ddg: -w * w * s,
            };
        }
        let (h, dh, ddh) = self.radial(theta);
        let (s, c) = (TAU * theta).sin_cos();
        let w = TAU;
        CurvePoint {
            theta,
            f: h * c,
            g: h * s,
            df: dh * c - w * h * s,
            dg: dh * s + w * h * c,
            ddf: ddh * c - 2.0 * w * dh * s - w * w * h * c,
            ddg: ddh * s + 2.0 * w * dh * c - w * w * h * s,
        }
    }

    /// Evaluates γ and its derivatives at θ mod 1.
    pub fn evaluate(&self, theta: f64) -> CurvePoint {
        let mut p = self.evaluate_unreduced(theta.rem_euclid(1.0));
        p.theta = theta;
        p
    }

    /// Radial function h = |γ| for radial representations.
    pub fn radius(&self, theta: f64) -> f64 {
        self.radial(theta.rem_euclid(1.0)).0
    }

    /// Largest deviation from the two-axis symmetry
    /// f(-θ) = f(θ), g(-θ) = -g(θ), f(1/2 - θ) = -f(θ), g(1/2 - θ) = g(θ).
    pub fn symmetry_defect(&self) -> f64 {
        let m = 256;
        let mut d: f64 = 0.0;
        for i in 0..m {
            let t = (i as f64 + 0.37) / m as f64;
            let p = self.evaluate(t);
            let a = self.evaluate(-t);
            let b = self.evaluate(0.5 - t);
            d = d
                .max((a.f - p.f).abs())
                .max((a.g + p.g).abs())
                .max((b.f + p.f).abs())
                .max((b.g - p.g).abs());
        }
        d
    }

    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.grid_size;
        (0..m).map(move |i| i as f64 / m as f64)
    }

    /// Grid check of positivity, contact condition, periodicity and convexity.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport {
            grid_size: self.grid_size,
            min_radius: f64::INFINITY,
            min_det: f64::INFINITY,
            min_det_theta: 0.0,
            min_convexity: f64::INFINITY,
            min_convexity_theta: 0.0,
            periodicity_defect: 0.0,
            positive: true,
            contact: true,
            periodic: true,
            convex: true,
            symmetric: self.symmetric,
            pass: true,
            violations: Vec::new(),
        };
        for theta in self.grid() {
            let p = self.evaluate_unreduced(theta);
            let r = if matches!(self.eval, Evaluator::Tight(_)) {
                1.0
            } else {
                self.radial(theta).0
            };
            rep.min_radius = rep.min_radius.min(r);
            let d = p.det();
            if d < rep.min_det {
                rep.min_det = d;
                rep.min_det_theta = theta;
            }
            let k = p.convexity();
            if k < rep.min_convexity {
                rep.min_convexity = k;
                rep.min_convexity_theta = theta;
            }
        }
        let a = self.evaluate_unreduced(0.0);
        let b = self.evaluate_unreduced(1.0);
        rep.periodicity_defect = [a.f - b.f, a.g - b.g, a.df - b.df, a.dg - b.dg]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));

        if rep.min_radius <= 0.0 {
            rep.positive = false;
            rep.violations.push(format!("radius not positive (min {:e})", rep.min_radius));
        }
        if rep.min_det <= CONTACT_MARGIN {
            rep.contact = false;
            rep.violations.push(format!(
                "contact condition fails: min D = {:e} at theta = {}",
                rep.min_det, rep.min_det_theta
            ));
        }
        if rep.periodicity_defect > PERIODICITY_TOL {
            rep.periodic = false;
            rep.violations
                .push(format!("periodicity defect {:e}", rep.periodicity_defect));
        }
        if rep.min_convexity <= 0.0 {
            rep.convex = false;
        }
        rep.pass = rep.positive && rep.contact && rep.periodic;
        rep
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid_size: usize,
    pub min_radius: f64,
    pub min_det: f64,
    pub min_det_theta: f64,
    pub min_convexity: f64,
    pub min_convexity_theta: f64,
    pub periodicity_defect: f64,
    pub positive: bool,
    pub contact: bool,
    pub periodic: bool,
    /// Strict convexity on the grid; informational, not part of `pass`.
    pub convex: bool,
    pub symmetric: bool,
    pub pass: bool,
    pub violations: Vec<String>,
}

/// Builds the symmetric convex oval of width ε with the default shoulder.
pub fn make_oval(epsilon: f64) -> Result<ProfileCurve, ProfileError> {
    make_oval_with(epsilon, default_shoulder(), DEFAULT_GRID)
}

pub fn make_oval_with(epsilon: f64, shoulder: f64, grid_size: usize) -> Result<ProfileCurve, ProfileError> {
    let curve = ProfileCurve::new(Shape::Oval { epsilon, shoulder }, grid_size)?;
    let rep = curve.validate();
    if !rep.pass || !rep.convex || !curve.symmetric {
        return Err(ProfileError::ConstructionFailure(format!(
            "oval failed validation: convex={}, symmetric={}, {:?}",
            rep.convex, curve.symmetric, rep.violations
        )));
    }
    Ok(curve)
}

/// Radial weight β(θ) = mean + amplitude · cos(2π · harmonic · θ) of the
/// compatible complex structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta {
    pub mean: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub harmonic: u32,
}

fn one() -> u32 {
    1
}

impl Default for Beta {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

impl Beta {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            amplitude: 0.0,
            harmonic: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if !(self.mean.is_finite() && self.amplitude.is_finite()) || self.mean - self.amplitude.abs() <= 0.0 {
            return Err(ProfileError::InvalidParameter("beta must stay positive".into()));
        }
        Ok(())
    }

    pub fn at(&self, theta: f64) -> f64 {
        self.mean + self.amplitude * (TAU * self.harmonic as f64 * theta).cos()
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let w = TAU * self.harmonic as f64;
        -self.amplitude * w * (w * theta).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ThickenedTorus,
    TightTorus,
}

/// A validated contact model T² × I with α = f dx + g dy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactModel {
    pub kind: ModelKind,
    pub curve: ProfileCurve,
}

impl ContactModel {
    /// Tight torus ξₙ; D is checked to equal 2πn on the grid.
    pub fn tight(n: u32) -> Result<Self, ProfileError> {
        let curve = ProfileCurve::tight(n)?;
        let target = TAU * n as f64;
        for theta in curve.grid() {
            let d = curve.evaluate(theta).det();
            if (d - target).abs() > 1e-9 * target {
                return Err(ProfileError::ConstructionFailure(format!(
                    "D = {d} differs from 2πn at theta = {theta}"
                )));
            }
        }
        Ok(Self {
            kind: ModelKind::TightTorus,
            curve,
        })
    }

    pub fn new(curve: ProfileCurve) -> Result<Self, ProfileError> {
        let rep = curve.validate();
        if !rep.positive || !rep.periodic {
            return Err(ProfileError::InvalidParameter(rep.violations.join("; ")));
        }
        if !rep.contact {
            return Err(ProfileError::NotContact {
                min_d: rep.min_det,
                theta: rep.min_det_theta,
            });
        }
        let kind = if matches!(curve.shape, Shape::Tight { .. }) {
            ModelKind::TightTorus
        } else {
            ModelKind::ThickenedTorus
        };
        Ok(Self { kind, curve })
    }

    pub fn evaluate(&self, theta: f64) -> CurvePoint {
        self.curve.evaluate(theta)
    }
}
