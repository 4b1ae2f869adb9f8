//! Dormand–Prince 5(4) adaptive integrator for small fixed-size systems.

use crate::error::{Error, Result};

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions<const N: usize> {
    pub rel_tol: f64,
    /// Per-component absolute tolerance.
    pub abs_tol: [f64; N],
    pub max_steps: usize,
    /// Initial step; chosen from the span when `None`.
    pub initial_step: Option<f64>,
}

impl<const N: usize> OdeOptions<N> {
    pub fn new(rel_tol: f64, abs_tol: [f64; N]) -> Self {
        Self { rel_tol, abs_tol, max_steps: 1_000_000, initial_step: None }
    }
}

/// Integrator state carried between successive targets.
#[derive(Clone, Copy, Debug)]
pub struct Stepper<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    step: f64,
    k1: Option<[f64; N]>,
    pub steps: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<const N: usize> Stepper<N> {
    pub fn new(t: f64, y: [f64; N]) -> Self {
        Self { t, y, step: 0.0, k1: None, steps: 0 }
    }

    /// Advances to `t_end` exactly, adapting the step on the way.
    pub fn advance<F>(&mut self, f: &mut F, t_end: f64, opts: &OdeOptions<N>) -> Result<()>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let dir = span.signum();
        if self.step == 0.0 || self.step.signum() != dir {
            self.step = opts.initial_step.map(f64::abs).unwrap_or(span.abs() * 1e-3) * dir;
        }
        let mut k1 = match self.k1 {
            Some(k) => k,
            None => f(self.t, &self.y)?,
        };
        let mut local_steps = 0usize;
        while (t_end - self.t) * dir > 0.0 {
            if local_steps >= opts.max_steps {
                return Err(Error::Integration {
                    last_z: self.t,
                    reason: format!("step budget of {} exhausted", opts.max_steps),
                });
            }
            let remaining = t_end - self.t;
            let last = self.step.abs() >= remaining.abs();
            let h = if last { remaining } else { self.step };
            let min_step = 16.0 * f64::EPSILON * self.t.abs().max(t_end.abs()).max(1e-300);
            if h.abs() < min_step && !last {
                return Err(Error::Integration {
                    last_z: self.t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let t = self.t;
            let y = &self.y;
            let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]))?;
            let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(
                t + C5 * h,
                &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + h,
                &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { t_end } else { t + h };
            let k7 = f(t_new, &y_new)?;

            let mut err_norm: f64 = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = opts.abs_tol[i] + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err_norm = err_norm.max((e / sc).abs());
            }
            if !err_norm.is_finite() {
                return Err(Error::Integration {
                    last_z: self.t,
                    reason: "non-finite state".into(),
                });
            }
            local_steps += 1;
            if err_norm <= 1.0 {
                self.t = t_new;
                self.y = y_new;
                k1 = k7;
                self.steps += 1;
                let factor = if err_norm == 0.0 {
                    5.0
                } else {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                // Keep the proposed step when the last step was clipped short.
                if !last {
                    self.step = h * factor;
                } else if factor < 1.0 {
                    self.step = self.step.min(h.abs() * factor) * dir;
                }
            } else {
                self.step = h * (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        self.k1 = Some(k1);
        Ok(())
    }
}

/// Integrates from `(t0, y0)` to `t1`.
pub fn solve<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions<N>,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut s = Stepper::new(t0, y0);
    s.advance(&mut f, t1, opts)?;
    Ok(s.y)
}

/// Integrates from `(t0, y0)` through `targets` in order (monotone in one
/// direction) and returns the state at each.
pub fn solve_at<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    targets: &[f64],
    opts: &OdeOptions<N>,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut s = Stepper::new(t0, y0);
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        s.advance(&mut f, t, opts)?;
        out.push(s.y);
    }
    Ok(out)
}
