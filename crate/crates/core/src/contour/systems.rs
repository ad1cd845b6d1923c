//! Right-hand sides of the coefficient equations and the drivers that
//! integrate them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dopri::{integrate_ray, Diagnostics, IntegrationSettings, TracePoint};
use super::{in_domain_d, Contour};
use crate::error::{Error, Result};
use crate::potential::Model;
use crate::riccati::{
    riccati_hankel_scaled, riccati_jy, taylor_coefficients, tilde_single, PartialWave, RiemannPoint,
};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MAX_OUT_GROWTH: f64 = 8.0;

/// Which coefficient system produced a [`RadialSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    /// `(F_in, F_out)`; the trace holds `(F_in, F_out e^{-2 Im(kr)})`.
    FinFout,
    AB,
    Tilde,
    /// `(A_0..A_N, B_0..B_N)` for the energy expansion of order `N`.
    Expansion(usize),
}

/// Terminal values of a coefficient system plus run diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub kind: SystemKind,
    pub values: Vec<Complex64>,
    pub theta: f64,
    pub diagnostics: Diagnostics,
    pub trace: Vec<TracePoint>,
}

impl RadialSolution {
    /// First two terminal values.
    pub fn pair(&self) -> (Complex64, Complex64) {
        (self.values[0], self.values[1])
    }
}

fn check_contour(model: &Model, contour: &Contour) -> Result<()> {
    if contour.theta != 0.0 && !model.potential.supports_complex_radius() {
        return Err(Error::UnsupportedEvaluation(model.potential.name()));
    }
    Ok(())
}

/// What to do when the energy lies outside the analyticity domain of the
/// k-scaled systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainPolicy {
    Strict,
    #[default]
    Warn,
}

fn check_domain(model: &Model, e: Complex64, theta: f64, policy: DomainPolicy) -> Result<()> {
    let eta = match model.potential.decay_constant() {
        Ok(eta) => eta,
        Err(err) => {
            if policy == DomainPolicy::Strict {
                return Err(err);
            }
            log::warn!("potential has no decay constant; analyticity domain not checked");
            return Ok(());
        }
    };
    if !in_domain_d(e, eta, theta, &model.units)? {
        if policy == DomainPolicy::Strict {
            return Err(Error::OutOfDomain { energy: e, theta });
        }
        log::warn!("E = {e} lies outside the analyticity domain for theta = {theta}");
        // A growing integrand never settles; fail now rather than at the step budget.
        let k = (e * model.units.c2mu).sqrt();
        if let Some(m) = decay_margin(model, k, theta).filter(|m| *m <= 0.0) {
            return Err(Error::NoConvergence(format!(
                "k-scaled integrand grows along the ray at E = {e}, theta = {theta} (decay margin {m:.3})"
            )));
        }
    }
    Ok(())
}

/// Net decay rate along the ray of the integrands of the `(A, B)` and
/// k-scaled systems: `eta cos(theta) - 2 |Im(k e^{-i theta})|`. `None` when the
/// potential has no decay constant.
fn decay_margin(model: &Model, k: Complex64, theta: f64) -> Option<f64> {
    let eta = model.potential.decay_constant().ok()?;
    let dir = Complex64::from_polar(1.0, -theta);
    Some(eta * theta.cos() - 2.0 * (k * dir).im.abs())
}

/// The remaining integral behind a tail is about `|dy/dr| / margin`, so the
/// tolerance is scaled by the margin to bound the remainder rather than the
/// derivative.
fn margin_tail(contour: &Contour, margin: Option<f64>) -> Option<super::dopri::TailControl> {
    let mut tail = contour.tail?;
    if let Some(m) = margin.filter(|m| *m > 0.0) {
        tail.tol *= m.min(1.0);
    }
    Some(tail)
}

fn k_scaled_tail(
    model: &Model,
    e: Complex64,
    contour: &Contour,
) -> Option<super::dopri::TailControl> {
    let k = (e * model.units.c2mu).sqrt();
    margin_tail(contour, decay_margin(model, k, contour.theta))
}

/// A run that reached the end of the ray without its tail settling
/// has not converged.
fn require_tail(contour: &Contour, run: &super::dopri::RayRun) -> Result<()> {
    if contour.tail.is_some() && !run.diagnostics.tail_converged {
        return Err(Error::NoConvergence(format!(
            "coefficients still changing at |r| = {:.1} (tail residual {:.1e})",
            run.diagnostics.r_end.norm(),
            run.diagnostics.tail_residual
        )));
    }
    Ok(())
}

/// Run `(A, B)` over `[t0, t1]` starting from `init`.
fn run_ab(
    model: &Model,
    pw: PartialWave,
    k: Complex64,
    contour: &Contour,
    init: [Complex64; 2],
    t0: f64,
    t1: f64,
    tail: Option<super::dopri::TailControl>,
    settings: &IntegrationSettings,
) -> Result<super::dopri::RayRun> {
    let kinv = k.inv();
    let mut failure = None;
    let run = integrate_ray(
        |r, y, dy| {
            let v = model.reduced_unchecked(r);
            if v == Complex64::default() {
                dy.iter_mut().for_each(|d| *d = Complex64::default());
                return;
            }
            match riccati_jy(pw, k * r) {
                Ok((j, yy)) => {
                    let u = y[0] * j - y[1] * yy;
                    dy[0] = -kinv * yy * v * u;
                    dy[1] = -kinv * j * v * u;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    dy[0] = Complex64::default();
                    dy[1] = Complex64::default();
                }
            }
        },
        &init,
        contour.theta,
        t0,
        t1,
        tail,
        settings,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(run),
    }
}

/// `(A, B)` with `u = A j - B y`, `A(0) = 1`, `B(0) = 0`; returns
/// `(a, b) = (A, B)` at the end of the contour. Fails with
/// [`Error::SubdominantOutgoing`] where `f_out` cannot be recovered.
pub fn integrate_ab(
    model: &Model,
    pw: PartialWave,
    at: &RiemannPoint,
    contour: &Contour,
    settings: &IntegrationSettings,
) -> Result<RadialSolution> {
    check_contour(model, contour)?;
    let k = at.momentum(&model.units);
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("(A, B) system at k = 0"));
    }
    // The integrand grows along the ray unless the potential outpaces j y.
    let margin = decay_margin(model, k, contour.theta);
    if margin.is_some_and(|m| m <= 0.0) {
        return Err(Error::OutOfDomain {
            energy: at.energy,
            theta: contour.theta,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let run = run_ab(
        model,
        pw,
        k,
        contour,
        [one, Complex64::default()],
        contour.r_start,
        contour.r_max_modulus,
        margin_tail(contour, margin),
        settings,
    )?;
    require_tail(contour, &run)?;
    // (a, b) mix in f_out, which is lost once it outgrows f_in on the ray.
    let dir = Complex64::from_polar(1.0, -contour.theta);
    if 2.0 * (k * dir).im * run.diagnostics.r_end.norm() > MAX_OUT_GROWTH {
        return Err(Error::SubdominantOutgoing);
    }
    Ok(RadialSolution {
        kind: SystemKind::AB,
        values: run.state,
        theta: contour.theta,
        diagnostics: run.diagnostics,
        trace: run.trace,
    })
}

/// `(F_in, F_out)` with `u = F_in h- + F_out h+`, `F(0) = 1/2`.
///
/// Near the origin the `(A, B)` system is integrated instead, because
/// `F_in h- + F_out h+` cancels to the relative order `(kr)^(2l)`; the
/// switch happens at `|k r| = 1/2` via `F_in,out = (A -+ i B) / 2`.
/// Beyond it `F_out` is carried as `G = F_out e^{-2 Im(kr)}`, which stays
/// bounded even where `F_out` grows exponentially. When that growth exceeds
/// `e^8` over the contour, `f_out` is not recovered to working accuracy and is returned as NaN.
pub fn integrate_finout(
    model: &Model,
    pw: PartialWave,
    at: &RiemannPoint,
    contour: &Contour,
    settings: &IntegrationSettings,
) -> Result<RadialSolution> {
    check_contour(model, contour)?;
    let k = at.momentum(&model.units);
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::LogSingularity);
    }
    let t_switch = (0.5 / k.norm()).clamp(contour.r_start, contour.r_max_modulus);
    let one = Complex64::new(1.0, 0.0);
    let mut diagnostics = Diagnostics::default();
    let mut trace = Vec::new();
    let (mut f_in, mut f_out) = (one * 0.5, one * 0.5);
    if t_switch > contour.r_start {
        let run = run_ab(
            model,
            pw,
            k,
            contour,
            [one, Complex64::default()],
            contour.r_start,
            t_switch,
            None,
            settings,
        )?;
        let (a, b) = (run.state[0], run.state[1]);
        f_in = (a - I * b) * 0.5;
        f_out = (a + I * b) * 0.5;
        diagnostics.merge(&run.diagnostics);
        trace.extend(run.trace.into_iter().map(|p| {
            let (a, b) = (p.state[0], p.state[1]);
            TracePoint {
                r: p.r,
                state: vec![
                    (a - I * b) * 0.5,
                    (a + I * b) * 0.5 * (-2.0 * (k * p.r).im).exp(),
                ],
            }
        }));
    }
    // Growth rate of F_out along the ray: |F_out| ~ exp(g t).
    let dir = Complex64::from_polar(1.0, -contour.theta);
    let g = 2.0 * (k * dir).im;
    let g0 = f_out * (-g * t_switch).exp();
    let inv2ik = (I * 2.0 * k).inv();
    let g_over_dir = g / dir;
    // The F_in integrand carries V h+^2 F_out, which decays only while the
    // potential outpaces a growing h+^2.
    let margin = model
        .potential
        .decay_constant()
        .ok()
        .map(|eta| eta * contour.theta.cos() + g.min(0.0));
    if margin.is_some_and(|m| m <= 0.0) {
        return Err(Error::OutOfDomain {
            energy: at.energy,
            theta: contour.theta,
        });
    }
    // Where F_out grows only F_in has a limit; G then just tracks the
    // decaying drive and is left out of the tail test.
    let tail = margin_tail(contour, margin).map(|mut tc| {
        if g > 0.0 {
            tc.components = Some(1);
        }
        tc
    });
    let mut failure = None;
    let run = integrate_ray(
        |r, y, dy| {
            let v = model.reduced_unchecked(r);
            if v == Complex64::default() {
                dy[0] = Complex64::default();
                dy[1] = -y[1] * g_over_dir;
                return;
            }
            let z = k * r;
            match riccati_hankel_scaled(pw, z) {
                Ok((hm, hp)) => {
                    let phase = Complex64::from_polar(1.0, z.re);
                    let w = y[0] * hm / phase + y[1] * hp * phase;
                    dy[0] = -inv2ik * v * hp * phase * w;
                    dy[1] = inv2ik * v * hm / phase * w - y[1] * g_over_dir;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    dy[0] = Complex64::default();
                    dy[1] = Complex64::default();
                }
            }
        },
        &[f_in, g0],
        contour.theta,
        t_switch,
        contour.r_max_modulus,
        tail,
        settings,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    require_tail(contour, &run)?;
    diagnostics.merge(&run.diagnostics);
    trace.extend(run.trace);
    let t_end = run.diagnostics.r_end.norm();
    let f_in = run.state[0];
    // Past about e^8 of growth the integration error of G is amplified beyond
    // what F_out can tolerate.
    let f_out = if g * t_end > MAX_OUT_GROWTH {
        Complex64::new(f64::NAN, f64::NAN)
    } else {
        run.state[1] * (g * t_end).exp()
    };
    Ok(RadialSolution {
        kind: SystemKind::FinFout,
        values: vec![f_in, f_out],
        theta: contour.theta,
        diagnostics,
        trace,
    })
}

/// `(At, Bt)` with `u = At jt - Bt yt`, `At(0) = 1`, `Bt(0) = 0`; single-valued
/// and holomorphic in `E` inside the analyticity domain.
pub fn integrate_tilde(
    model: &Model,
    pw: PartialWave,
    e: Complex64,
    contour: &Contour,
    scale_r: f64,
    domain: DomainPolicy,
    settings: &IntegrationSettings,
) -> Result<RadialSolution> {
    check_contour(model, contour)?;
    check_domain(model, e, contour.theta, domain)?;
    let c2mu = model.units.c2mu;
    let mut failure = None;
    let run = integrate_ray(
        |r, y, dy| {
            let v = model.reduced_unchecked(r);
            if v == Complex64::default() {
                dy.iter_mut().for_each(|d| *d = Complex64::default());
                return;
            }
            match tilde_single(pw.ell, e, r, c2mu, scale_r) {
                Ok((jt, yt)) => {
                    let u = y[0] * jt - y[1] * yt;
                    dy[0] = -yt * v * u;
                    dy[1] = -jt * v * u;
                }
                Err(err) => {
                    failure.get_or_insert(err);
                    dy[0] = Complex64::default();
                    dy[1] = Complex64::default();
                }
            }
        },
        &[Complex64::new(1.0, 0.0), Complex64::default()],
        contour.theta,
        contour.r_start,
        contour.r_max_modulus,
        k_scaled_tail(model, e, contour),
        settings,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    require_tail(contour, &run)?;
    Ok(RadialSolution {
        kind: SystemKind::Tilde,
        values: run.state,
        theta: contour.theta,
        diagnostics: run.diagnostics,
        trace: run.trace,
    })
}

/// Energy-Taylor coefficients `(A_n, B_n)`, `n = 0..=order`, of `(At, Bt)`
/// about `e0`: `A_n' = -sum c_i V (A_j s_k - B_j c_k)`,
/// `B_n' = -sum s_i V (A_j s_k - B_j c_k)` over `i + j + k = n`.
pub fn integrate_expansion(
    model: &Model,
    pw: PartialWave,
    e0: Complex64,
    order: usize,
    contour: &Contour,
    scale_r: f64,
    domain: DomainPolicy,
    settings: &IntegrationSettings,
) -> Result<RadialSolution> {
    check_contour(model, contour)?;
    check_domain(model, e0, contour.theta, domain)?;
    let n = order;
    let units = model.units;
    let mut y0 = vec![Complex64::default(); 2 * (n + 1)];
    y0[0] = Complex64::new(1.0, 0.0);
    let mut failure = None;
    let mut p = vec![Complex64::default(); n + 1];
    let run = integrate_ray(
        |r, y, dy| {
            let v = model.reduced_unchecked(r);
            if v == Complex64::default() {
                dy.iter_mut().for_each(|d| *d = Complex64::default());
                return;
            }
            let tc = match taylor_coefficients(pw, e0, r, n, &units, scale_r) {
                Ok(tc) => tc,
                Err(err) => {
                    failure.get_or_insert(err);
                    dy.iter_mut().for_each(|d| *d = Complex64::default());
                    return;
                }
            };
            let (a, b) = y.split_at(n + 1);
            for m in 0..=n {
                let mut acc = Complex64::default();
                for j in 0..=m {
                    acc += a[j] * tc.s[m - j] - b[j] * tc.c[m - j];
                }
                p[m] = acc * v;
            }
            for m in 0..=n {
                let mut da = Complex64::default();
                let mut db = Complex64::default();
                for i in 0..=m {
                    da += tc.c[i] * p[m - i];
                    db += tc.s[i] * p[m - i];
                }
                dy[m] = -da;
                dy[n + 1 + m] = -db;
            }
        },
        &y0,
        contour.theta,
        contour.r_start,
        contour.r_max_modulus,
        k_scaled_tail(model, e0, contour),
        settings,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    require_tail(contour, &run)?;
    Ok(RadialSolution {
        kind: SystemKind::Expansion(n),
        values: run.state,
        theta: contour.theta,
        diagnostics: run.diagnostics,
        trace: run.trace,
    })
}

#[cfg(test)]
mod tests;
