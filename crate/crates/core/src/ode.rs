//! Adaptive Dormand–Prince 5(4) integrator with cubic Hermite dense output.
//!
//! The integrator works on fixed-size states `[f64; N]` and reports every
//! accepted step to an observer, which may stop the integration early. The
//! observer receives both endpoints of the step together with the right-hand
//! side there, which is enough for a C¹ Hermite interpolant.

use std::ops::ControlFlow;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One accepted step, with enough data for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolant and its time derivative at `t` in `[t0, t1]`.
    pub fn interpolate(&self, t: f64) -> ([f64; N], [f64; N]) {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return (self.y0, self.f0);
        }
        let s = (t - self.t0) / h;
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        let d00 = (6.0 * s * s - 6.0 * s) / h;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d01 = (-6.0 * s * s + 6.0 * s) / h;
        let d11 = 3.0 * s * s - 2.0 * s;
        let mut y = [0.0; N];
        let mut dy = [0.0; N];
        for i in 0..N {
            y[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
            dy[i] = d00 * self.y0[i] + d10 * self.f0[i] + d01 * self.y1[i] + d11 * self.f1[i];
        }
        (y, dy)
    }
}

/// Final state of an integration run.
#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed |h|; `f64::INFINITY` for none.
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    /// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<const N: usize, F, O>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        mut observer: O,
    ) -> Result<Outcome<N>, OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        O: FnMut(&Step<N>) -> ControlFlow<()>,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(Outcome {
                t: t0,
                y: y0,
                steps: 0,
                stopped_early: false,
            });
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut f = rhs(t, &y);
        let mut h = self.initial_step(&mut rhs, t, &y, &f, span.abs(), dir) * dir;
        let mut steps = 0usize;

        loop {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps(self.max_steps));
            }
            let remaining = t1 - t;
            if remaining * dir <= 0.0 {
                break;
            }
            let mut last = false;
            if (h.abs()) >= remaining.abs() * (1.0 - 1e-12) {
                h = remaining;
                last = true;
            }
            let k1 = f;
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = rhs(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { t1 } else { t + h };
            let k7 = rhs(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h.abs() <= self.h_min {
                    return Err(OdeError::NonFinite(t));
                }
                h *= 0.25;
                continue;
            }

            if err <= 1.0 {
                steps += 1;
                let step = Step {
                    t0: t,
                    y0: y,
                    f0: f,
                    t1: t_new,
                    y1: y_new,
                    f1: k7,
                };
                t = t_new;
                y = y_new;
                f = k7;
                if observer(&step).is_break() {
                    return Ok(Outcome {
                        t,
                        y,
                        steps,
                        stopped_early: true,
                    });
                }
                if last {
                    break;
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h = (h * fac).abs().min(self.h_max) * dir;
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h *= fac;
                if h.abs() < self.h_min {
                    return Err(OdeError::StepUnderflow { t, h: h.abs() });
                }
            }
        }
        Ok(Outcome {
            t,
            y,
            steps,
            stopped_early: false,
        })
    }

    /// Integrates to `t1` and returns only the final state.
    pub fn solve<const N: usize, F>(&self, rhs: F, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N], OdeError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        Ok(self
            .integrate(rhs, t0, y0, t1, |_| ControlFlow::Continue(()))?
            .y)
    }

    fn initial_step<const N: usize, F>(
        &self,
        rhs: &mut F,
        t: f64,
        y: &[f64; N],
        f: &[f64; N],
        span: f64,
        dir: f64,
    ) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        // Hairer–Wanner starting step heuristic.
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (f[i] / sc).powi(2);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span).min(self.h_max);
        let y1 = axpy(y, h0 * dir, &[(1.0, f)]);
        let f1 = rhs(t + h0 * dir, &y1);
        let mut d2 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d2 += ((f1[i] - f[i]) / sc).powi(2);
        }
        d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.h_max).max(self.h_min)
    }
}
