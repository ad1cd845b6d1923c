//! Damped complex Newton iteration with a central-difference derivative.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOptions {
    pub max_iter: usize,
    /// Converged once `|step| <= step_tol max(1, |z|)`.
    pub step_tol: f64,
    /// Also converged once steps below `noise_tol max(1, |z|)` stop
    /// shrinking, which is where noise in `f` takes over.
    pub noise_tol: f64,
    /// Difference step relative to `max(1, |z|)`.
    pub diff_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 30,
            step_tol: 1e-12,
            noise_tol: 1e-9,
            diff_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonResult {
    pub root: Complex64,
    pub value: Complex64,
    pub iterations: usize,
    pub last_step: f64,
}

/// Newton for `f(z) = 0` from `seed`. `project` maps iterates back into the
/// admissible region (it must be the identity there).
pub(crate) fn newton<F, P>(
    mut f: F,
    seed: Complex64,
    opts: &NewtonOptions,
    project: P,
) -> Result<NewtonResult>
where
    F: FnMut(Complex64) -> Result<Complex64>,
    P: Fn(Complex64) -> Complex64,
{
    let mut z = project(seed);
    let mut fz = f(z)?;
    let mut prev_moved = f64::INFINITY;
    for it in 1..=opts.max_iter {
        if fz == Complex64::default() {
            return Ok(NewtonResult {
                root: z,
                value: fz,
                iterations: it - 1,
                last_step: 0.0,
            });
        }
        let scale = z.norm().max(1.0);
        let h = opts.diff_step * scale;
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d == Complex64::default() || !d.is_finite() {
            return Err(Error::NoConvergence(format!("zero derivative at {z}")));
        }
        let mut step = -fz / d;
        let mut next = project(z + step);
        let mut fnext = f(next)?;
        // Halve the step while the residual grows.
        let mut halvings = 0;
        while fnext.norm() > fz.norm() && halvings < 8 && step.norm() > opts.step_tol * scale {
            step *= 0.5;
            next = project(z + step);
            fnext = f(next)?;
            halvings += 1;
        }
        let moved = (next - z).norm();
        z = next;
        fz = fnext;
        let stalled = moved <= opts.noise_tol * scale && moved >= 0.5 * prev_moved;
        prev_moved = moved;
        if moved <= opts.step_tol * scale || stalled {
            return Ok(NewtonResult {
                root: z,
                value: fz,
                iterations: it,
                last_step: moved,
            });
        }
    }
    Err(Error::NoConvergence(format!(
        "Newton iteration from {seed} did not settle in {} steps",
        opts.max_iter
    )))
}
