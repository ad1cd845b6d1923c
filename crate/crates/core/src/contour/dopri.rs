//! Dormand-Prince 5(4) with adaptive steps for complex state vectors,
//! driven along the ray `r = t e^{-i theta}`, `t` real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size control and safety limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Any component above this magnitude aborts the run.
    pub overflow: f64,
    /// Record every accepted step.
    pub trace: bool,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 500_000,
            overflow: 1e290,
            trace: false,
        }
    }
}

impl IntegrationSettings {
    pub fn with_tolerance(rtol: f64) -> Self {
        IntegrationSettings {
            rtol,
            atol: (rtol * 1e-4).min(1e-14),
            ..Default::default()
        }
    }
}

/// Stop once every `|dy/dr|_i <= tol max(1, |y_i|)` for three accepted
/// steps in a row, but not before `|r| = min_modulus`. Only the first
/// `components` entries are checked (all of them if `None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailControl {
    pub tol: f64,
    pub min_modulus: f64,
    pub components: Option<usize>,
}

/// One accepted step of a traced run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub r: Complex64,
    pub state: Vec<Complex64>,
}

/// What happened during a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    /// Final radius reached.
    pub r_end: Complex64,
    /// `max_i |dy/dr|_i / max(1, |y_i|)` at the last point.
    pub tail_residual: f64,
    /// Whether the tail criterion stopped the run.
    pub tail_converged: bool,
    /// Sum of accepted local error estimates in units of the tolerance.
    pub accumulated_error: f64,
}

impl Diagnostics {
    pub(crate) fn merge(&mut self, other: &Diagnostics) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.rhs_evaluations += other.rhs_evaluations;
        self.r_end = other.r_end;
        self.tail_residual = other.tail_residual;
        self.tail_converged = other.tail_converged;
        self.accumulated_error += other.accumulated_error;
    }
}

pub(crate) struct RayRun {
    pub state: Vec<Complex64>,
    pub diagnostics: Diagnostics,
    pub trace: Vec<TracePoint>,
}

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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `dy/dr = f(r, y)` from `|r| = t0` to `|r| = t1` along the ray
/// of angle `-theta`.
pub(crate) fn integrate_ray<F>(
    mut f: F,
    y0: &[Complex64],
    theta: f64,
    t0: f64,
    t1: f64,
    tail: Option<TailControl>,
    settings: &IntegrationSettings,
) -> Result<RayRun>
where
    F: FnMut(Complex64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let dir = Complex64::from_polar(1.0, -theta);
    let mut diag = Diagnostics::default();
    let mut trace = Vec::new();
    let mut y = y0.to_vec();
    let mut t = t0;

    let mut eval = |t: f64, y: &[Complex64], out: &mut [Complex64], count: &mut usize| {
        f(dir * t, y, out);
        for v in out.iter_mut() {
            *v *= dir;
        }
        *count += 1;
    };

    let mut k1 = vec![Complex64::default(); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut ytmp = k1.clone();
    let mut ynew = k1.clone();

    eval(t, &y, &mut k1, &mut diag.rhs_evaluations);
    if settings.trace {
        trace.push(TracePoint {
            r: dir * t,
            state: y.clone(),
        });
    }

    let scale = |y: &[Complex64], i: usize| settings.atol + settings.rtol * y[i].norm();
    // Initial step from the size of the derivative (Hairer's heuristic).
    let d0 = (0..n)
        .map(|i| y[i].norm() / scale(&y, i))
        .fold(0.0, f64::max);
    let d1 = (0..n)
        .map(|i| k1[i].norm() / scale(&y, i))
        .fold(0.0, f64::max);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * t.max(1e-3)
    } else {
        0.01 * d0 / d1
    };
    h = h.min(t1 - t).min(t.max(1e-3)).max(1e-14 * t.max(1e-300));

    let mut tail_hits = 0;
    while t < t1 {
        if diag.steps + diag.rejected >= settings.max_steps {
            return Err(Error::TooManySteps(settings.max_steps));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for i in 0..n {
            ytmp[i] = y[i] + k1[i] * (h * A21);
        }
        eval(t + C2 * h, &ytmp, &mut k2, &mut diag.rhs_evaluations);
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        eval(t + C3 * h, &ytmp, &mut k3, &mut diag.rhs_evaluations);
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        eval(t + C4 * h, &ytmp, &mut k4, &mut diag.rhs_evaluations);
        for i in 0..n {
            ytmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        eval(t + C5 * h, &ytmp, &mut k5, &mut diag.rhs_evaluations);
        for i in 0..n {
            ytmp[i] =
                y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        eval(t + h, &ytmp, &mut k6, &mut diag.rhs_evaluations);
        for i in 0..n {
            ynew[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        eval(t + h, &ynew, &mut k7, &mut diag.rhs_evaluations);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = settings.atol + settings.rtol * y[i].norm().max(ynew[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            err = 1e10;
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            diag.steps += 1;
            diag.accumulated_error += err;
            if let Some((i, v)) = y
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.norm() <= settings.overflow))
            {
                return Err(Error::ContourInadequate {
                    r: t,
                    component: i,
                    magnitude: v.norm(),
                });
            }
            if settings.trace {
                trace.push(TracePoint {
                    r: dir * t,
                    state: y.clone(),
                });
            }
            let checked = tail.and_then(|tc| tc.components).unwrap_or(n).min(n);
            let residual = (0..checked)
                .map(|i| k1[i].norm() / y[i].norm().max(1.0))
                .fold(0.0, f64::max);
            diag.tail_residual = residual;
            if let Some(tc) = tail {
                if t >= tc.min_modulus && residual <= tc.tol {
                    tail_hits += 1;
                    if tail_hits >= 3 {
                        diag.tail_converged = true;
                        break;
                    }
                } else {
                    tail_hits = 0;
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            diag.rejected += 1;
            h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
            if h < 1e-15 * t.max(1e-300) {
                return Err(Error::StepSizeUnderflow { r: t });
            }
        }
    }
    diag.r_end = dir * t;
    Ok(RayRun {
        state: y,
        diagnostics: diag,
        trace,
    })
}
