//! Riccati-Bessel and Riccati-Hankel functions of half-integer order
//! `lambda = l - 1/2`, their k-scaled analytic counterparts, the branch
//! function `h(k)`, and Taylor coefficients in energy.

pub mod bessel;
pub mod series;

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::UnitSystem;
use bessel::{cylinder_orders, factorial, hankel};
use series::small_argument_derivatives;

/// Below this `|k r|` the k-scaled functions come from the energy series.
pub(crate) const TILDE_SERIES_LIMIT: f64 = bessel::SERIES_RADIUS;
/// Below this `|k0 r|` Taylor coefficients come from binomial re-expansion
/// of the energy series rather than the order recurrence.
pub(crate) const TAYLOR_SERIES_LIMIT: f64 = 4.0;

/// Partial wave with angular momentum `l >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialWave {
    pub ell: u32,
}

impl PartialWave {
    pub fn new(ell: u32) -> Self {
        PartialWave { ell }
    }

    /// `lambda = l - 1/2`.
    pub fn lambda(&self) -> f64 {
        self.ell as f64 - 0.5
    }

    /// Neumann factor: 1 for `l = 0`, 2 otherwise.
    pub fn epsilon(&self) -> f64 {
        if self.ell == 0 {
            1.0
        } else {
            2.0
        }
    }
}

/// Which half of the momentum plane a sheet of the energy surface maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfPlane {
    Upper,
    Lower,
}

/// Branch of `ln k` used by `h(k)`: the half-plane fixes the cut of
/// `arg k`, `winding` adds whole turns of the energy around zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogBranch {
    pub half_plane: HalfPlane,
    pub winding: i32,
}

impl LogBranch {
    /// Physical sheet: bound states live here.
    pub const PHYSICAL: LogBranch = LogBranch {
        half_plane: HalfPlane::Upper,
        winding: 0,
    };
    /// Sheet reached by crossing the positive real energy axis downwards:
    /// resonances live here.
    pub const RESONANCE: LogBranch = LogBranch {
        half_plane: HalfPlane::Lower,
        winding: 0,
    };

    /// `arg k` in `(-pi/2, 3pi/2]` for the upper half-plane and in
    /// `(-3pi/2, pi/2]` for the lower one.
    pub fn arg(&self, k: Complex64) -> f64 {
        let a = k.arg();
        match self.half_plane {
            HalfPlane::Upper if a <= -PI / 2.0 => a + 2.0 * PI,
            HalfPlane::Lower if a > PI / 2.0 => a - 2.0 * PI,
            _ => a,
        }
    }
}

/// A point of the energy surface: the energy and the sheet it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannPoint {
    pub energy: Complex64,
    pub branch: LogBranch,
}

impl RiemannPoint {
    pub fn new(energy: Complex64, branch: LogBranch) -> Self {
        RiemannPoint { energy, branch }
    }

    pub fn physical(energy: Complex64) -> Self {
        RiemannPoint::new(energy, LogBranch::PHYSICAL)
    }

    pub fn resonance(energy: Complex64) -> Self {
        RiemannPoint::new(energy, LogBranch::RESONANCE)
    }

    /// Momentum `k` with `k^2 = c2mu E`, in the half-plane of the sheet.
    pub fn momentum(&self, units: &UnitSystem) -> Complex64 {
        let k = units.k_squared(self.energy).sqrt();
        match self.branch.half_plane {
            HalfPlane::Upper if k.im < 0.0 => -k,
            HalfPlane::Lower if k.im > 0.0 => -k,
            _ => k,
        }
    }

    /// `h(k)` on this sheet.
    pub fn h(&self, units: &UnitSystem, scale_r: f64) -> Result<Complex64> {
        log_branch_h(self.momentum(units), scale_r, self.branch)
    }
}

/// `(j_lambda(z), y_lambda(z)) = sqrt(pi z / 2) (J_l(z), Y_l(z))`.
pub fn riccati_jy(pw: PartialWave, z: Complex64) -> Result<(Complex64, Complex64)> {
    let l = pw.ell as usize;
    let c = cylinder_orders(z, l)?;
    let pre = (z * (PI / 2.0)).sqrt();
    Ok((pre * c.j[l], pre * c.y[l]))
}

/// `|j y' - y j' - 1|` relative to `max(1, |j y'|)`, with the derivatives
/// from `F_l' = F_{l-1} - (lambda / z) F_l` and `F_{-1} = -F_1`.
pub fn wronskian_residual(pw: PartialWave, z: Complex64) -> Result<f64> {
    let (j, y) = riccati_jy(pw, z)?;
    let (jm, ym) = if pw.ell == 0 {
        let (j1, y1) = riccati_jy(PartialWave::new(1), z)?;
        (-j1, -y1)
    } else {
        riccati_jy(PartialWave::new(pw.ell - 1), z)?
    };
    let lam = pw.lambda();
    let (dj, dy) = (jm - j * lam / z, ym - y * lam / z);
    Ok((j * dy - y * dj - 1.0).norm() / (j * dy).norm().max(1.0))
}

/// `(h-(z), h+(z)) = (j - i y, j + i y)`.
pub fn riccati_hankel(pw: PartialWave, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (h1, h2) = hankel(pw.ell as usize, z)?;
    let pre = (z * (PI / 2.0)).sqrt();
    Ok((pre * h2, pre * h1))
}

/// `(e^{iz} h-(z), e^{-iz} h+(z))`: Riccati-Hankel functions with their
/// exponential behaviour divided out.
pub fn riccati_hankel_scaled(pw: PartialWave, z: Complex64) -> Result<(Complex64, Complex64)> {
    let (h1, h2) = bessel::hankel_scaled(pw.ell as usize, z)?;
    let pre = (z * (PI / 2.0)).sqrt();
    Ok((pre * h2, pre * h1))
}

/// `h(k) = (2/pi) ln(k R / 2) + 2 i m` on the given branch.
pub fn log_branch_h(k: Complex64, scale_r: f64, branch: LogBranch) -> Result<Complex64> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::LogSingularity);
    }
    let ln = Complex64::new((k.norm() * scale_r * 0.5).ln(), branch.arg(k));
    Ok(ln * FRAC_2_PI + Complex64::new(0.0, 2.0 * branch.winding as f64))
}

/// k-scaled functions `(jt, yt)` of orders `0..=m_max` at energy `e`.
/// Both are entire in `e`.
pub(crate) fn tilde_orders(
    m_max: usize,
    e: Complex64,
    r: Complex64,
    c2mu: f64,
    scale_r: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if r == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("k-scaled y at r = 0"));
    }
    let k = (e * c2mu).sqrt();
    if k.norm() * r.norm() <= TILDE_SERIES_LIMIT {
        Ok(tilde_orders_series(m_max, e, r, c2mu, scale_r))
    } else {
        tilde_orders_bessel(m_max, e, r, c2mu, scale_r)
    }
}

fn tilde_orders_series(
    m_max: usize,
    e: Complex64,
    r: Complex64,
    c2mu: f64,
    scale_r: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    (0..=m_max)
        .map(|m| {
            let (s, c) = small_argument_derivatives(m as u32, e, r, c2mu, scale_r, 0);
            (s[0], c[0])
        })
        .unzip()
}

fn tilde_orders_bessel(
    m_max: usize,
    e: Complex64,
    r: Complex64,
    c2mu: f64,
    scale_r: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let mut k = (e * c2mu).sqrt();
    if (k * r).re < 0.0 {
        k = -k;
    }
    let z = k * r;
    let cyl = cylinder_orders(z, m_max)?;
    let pre = (r * (PI / 2.0)).sqrt();
    let log = (r / scale_r).ln() * FRAC_2_PI;
    let kinv = k.inv();
    let mut kp = Complex64::new(1.0, 0.0);
    let mut jt = Vec::with_capacity(m_max + 1);
    let mut yt = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        jt.push(pre * cyl.j[m] * kinv.powi(m as i32));
        yt.push(pre * kp * (cyl.yreg[m] + log * cyl.j[m]));
        kp *= k;
    }
    Ok((jt, yt))
}

/// `(jt_lambda(E, r), yt_lambda(E, r))`: Riccati functions rescaled by
/// powers of `k` and with the logarithm of `h(k)` removed, so that both are
/// single-valued and entire in the energy.
pub fn tilde_jy(
    pw: PartialWave,
    e: Complex64,
    r: Complex64,
    units: &UnitSystem,
    scale_r: f64,
) -> Result<(Complex64, Complex64)> {
    tilde_single(pw.ell, e, r, units.c2mu, scale_r)
}

pub(crate) fn tilde_single(
    ell: u32,
    e: Complex64,
    r: Complex64,
    c2mu: f64,
    scale_r: f64,
) -> Result<(Complex64, Complex64)> {
    if r == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("k-scaled y at r = 0"));
    }
    let k = (e * c2mu).sqrt();
    if k.norm() * r.norm() <= TILDE_SERIES_LIMIT {
        return Ok(series::tilde_series(ell, e, r, c2mu, scale_r));
    }
    let l = ell as usize;
    let (jt, yt) = tilde_orders_bessel(l, e, r, c2mu, scale_r)?;
    Ok((jt[l], yt[l]))
}

/// Energy-Taylor coefficients of the k-scaled functions at fixed `r`:
/// `s_n = (1/n!) d^n jt / dE^n`, `c_n = (1/n!) d^n yt / dE^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoefficients {
    pub s: Vec<Complex64>,
    pub c: Vec<Complex64>,
}

/// Taylor coefficients up to order `n` at `E0`.
pub fn taylor_coefficients(
    pw: PartialWave,
    e0: Complex64,
    r: Complex64,
    n: usize,
    units: &UnitSystem,
    scale_r: f64,
) -> Result<TaylorCoefficients> {
    if r == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("Taylor coefficients at r = 0"));
    }
    let c2mu = units.c2mu;
    let k2 = e0 * c2mu;
    if k2.norm().sqrt() * r.norm() <= TAYLOR_SERIES_LIMIT {
        let (s, c) = small_argument_derivatives(pw.ell, e0, r, c2mu, scale_r, n);
        return Ok(TaylorCoefficients { s, c });
    }
    taylor_by_recurrence(pw, e0, r, n, c2mu, scale_r)
}

/// Order recurrence for the Taylor coefficients; needs `k0 != 0`.
fn taylor_by_recurrence(
    pw: PartialWave,
    e0: Complex64,
    r: Complex64,
    n: usize,
    c2mu: f64,
    scale_r: f64,
) -> Result<TaylorCoefficients> {
    let k2 = e0 * c2mu;
    let l = pw.ell as usize;
    let m_max = l + n;
    let (jt, yt) = tilde_orders(m_max, e0, r, c2mu, scale_r)?;
    let a = 0.5 * c2mu;
    let b = c2mu / PI;
    let ar = r * a;

    let s = (0..=n)
        .map(|i| (-ar).powi(i as i32) * jt[l + i] / factorial(i))
        .collect();

    // Y(q) = yt of order l - q, continued to negative order.
    let y_of = |q: usize| -> Complex64 {
        if q <= l {
            yt[l - q]
        } else {
            let p = q - l;
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            yt[p] * k2.powi(-(p as i32)) * sign
        }
    };
    // F(q, m) = k^(2(nu - m)) jt_nu with nu = l - q, continued likewise.
    let f_of = |q: usize, m: usize| -> Complex64 {
        if q <= l {
            let nu = l - q;
            jt[nu] * k2.powi(nu as i32 - m as i32)
        } else {
            let p = q - l;
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            jt[p] * k2.powi(-(m as i32)) * sign
        }
    };

    // d/dE Y(q) = a r Y(q+1) - b F(q, 1)
    // d/dE F(q, m) = -2 m a F(q, m+1) + a r F(q+1, m)
    let dim = n + 2;
    let mut beta = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut alpha = Complex64::new(1.0, 0.0);
    let mut c = Vec::with_capacity(n + 1);
    c.push(yt[l]);
    for t in 1..=n {
        let mut next = vec![Complex64::new(0.0, 0.0); dim * dim];
        for q in 0..t {
            for m in 1..t.max(1) + 1 {
                let v = beta[q * dim + m];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                next[q * dim + m + 1] -= v * (2.0 * m as f64 * a);
                next[(q + 1) * dim + m] += v * ar;
            }
        }
        next[(t - 1) * dim + 1] -= alpha * b;
        alpha *= ar;
        beta = next;
        let mut acc = alpha * y_of(t);
        for q in 0..=t {
            for m in 1..=t {
                let v = beta[q * dim + m];
                if v != Complex64::new(0.0, 0.0) {
                    acc += v * f_of(q, m);
                }
            }
        }
        c.push(acc / factorial(t));
    }
    Ok(TaylorCoefficients { s, c })
}

#[cfg(test)]
mod tests;
