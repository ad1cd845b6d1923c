//! Cylinder functions of integer order and complex argument.
//!
//! Power series for `|z| <= SERIES_RADIUS`, Hankel asymptotics with optimal
//! truncation beyond. Recessive Hankel functions in the mid range, where
//! `J +/- iY` cancels, come from the Sommerfeld-type integral instead.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const SERIES_RADIUS: f64 = 12.0;
pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;
const RECESSIVE_IM: f64 = 3.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `psi(m) = -gamma + H_{m-1}` for positive integer `m`.
pub(crate) fn digamma_int(m: usize) -> f64 {
    debug_assert!(m >= 1);
    let mut h = 0.0;
    for i in 1..m {
        h += 1.0 / i as f64;
    }
    h - EULER_GAMMA
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `J_n`, `Y_n` and the log-free part `Yreg_n = Y_n - (2/pi) Log(z/2) J_n`
/// for orders `0..=n_max`.
#[derive(Debug, Clone)]
pub struct CylinderOrders {
    pub j: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub yreg: Vec<Complex64>,
}

/// Power series of `J_n` for `n >= 0`.
fn j_series(n: usize, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    let x = -(half * half);
    let mut term = Complex64::new(1.0 / factorial(n), 0.0);
    let mut sum = term;
    let kmin = (z.norm() * 0.5) as usize + 2;
    for k in 1..400 {
        term *= x / (k as f64 * (n + k) as f64);
        sum += term;
        if k > kmin && term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * half.powi(n as i32)
}

/// Power series of `Yreg_n` for `n >= 0`.
fn yreg_series(n: usize, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    let x = -(half * half);
    let mut finite = Complex64::new(0.0, 0.0);
    if n > 0 {
        let inv = half.inv();
        let mut p = inv.powi(n as i32);
        let h2 = half * half;
        for k in 0..n {
            finite += p * (factorial(n - k - 1) / factorial(k));
            p *= h2;
        }
    }
    let mut psi_a = digamma_int(1);
    let mut psi_b = digamma_int(n + 1);
    let mut coef = Complex64::new(1.0 / factorial(n), 0.0);
    let mut sum = coef * (psi_a + psi_b);
    let kmin = (z.norm() * 0.5) as usize + 2;
    for k in 1..400 {
        coef *= x / (k as f64 * (n + k) as f64);
        psi_a += 1.0 / k as f64;
        psi_b += 1.0 / (n + k) as f64;
        let term = coef * (psi_a + psi_b);
        sum += term;
        if k > kmin && term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -(finite + sum * half.powi(n as i32)) / PI
}

/// Hankel asymptotic sums `sum_k (+-i)^k a_k(nu) / z^k` truncated at the
/// smallest term.
fn hankel_sums(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    let mu = 4.0 * nu * nu;
    let zi = z.inv();
    let mut a = Complex64::new(1.0, 0.0);
    let mut plus = a;
    let mut minus = a;
    let mut last = f64::INFINITY;
    let mut ipow = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        a *= zi * ((mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf));
        let size = a.norm();
        if size > last || size == 0.0 {
            break;
        }
        ipow *= I;
        plus += ipow * a;
        minus += ipow.conj() * a;
        last = size;
        if size < 1e-17 {
            break;
        }
    }
    (plus, minus)
}

/// `H1_nu(z)` and `H2_nu(z)` from the asymptotic expansion, each carrying
/// the common factor `sqrt(2 / (pi z))`.
fn hankel_asymptotic(nu: f64, z: Complex64) -> (Complex64, Complex64) {
    let (p, m) = hankel_sums(nu, z);
    let phase = z - nu * FRAC_PI_2 - FRAC_PI_4;
    let pre = (2.0 / (PI * z)).sqrt();
    let e = (I * phase).exp();
    (pre * e * p, pre * e.inv() * m)
}

/// `H1_n(z)` for `Im z > 0` from
/// `H1_n(z) = (2 / (i pi)) e^{-i n pi / 2} int_0^inf e^{i z cosh t} cosh(n t) dt`,
/// trapezoidal rule in `t`.
fn hankel1_integral(n: usize, z: Complex64) -> Complex64 {
    debug_assert!(z.im > 0.0);
    let nf = n as f64;
    // Integrand magnitude exp(-Im z cosh t + n t) is negligible past t_max.
    let mut t_max: f64 = 1.0;
    while -z.im * t_max.cosh() + nf * t_max > -42.0 {
        t_max += 0.25;
    }
    // The integrand stays decaying in the strip |Im t| < d, so the
    // trapezoidal error is about exp(-2 pi d / h).
    let d = (PI / 3.0).min(0.5 * z.im / z.re.abs().max(1e-300));
    let h = 2.0 * PI * d / 42.0;
    let steps = (t_max / h).ceil() as usize;
    let h = t_max / steps as f64;
    let mut sum = (I * z).exp() * 0.5;
    for s in 1..=steps {
        let t = s as f64 * h;
        sum += (I * z * t.cosh()).exp() * (nf * t).cosh();
    }
    let rot = Complex64::from_polar(1.0, -nf * FRAC_PI_2);
    sum * h * rot * (2.0 / PI) / I
}

/// `J_n` and `Y_n` for orders `0..=n_max`; errors at `z = 0`.
pub fn cylinder_orders(z: Complex64, n_max: usize) -> Result<CylinderOrders> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("Y_n(0)"));
    }
    let r = z.norm();
    let log_half = (z * 0.5).ln() * FRAC_2_PI;
    if r <= SERIES_RADIUS {
        let j: Vec<Complex64> = (0..=n_max).map(|n| j_series(n, z)).collect();
        let yreg: Vec<Complex64> = (0..=n_max).map(|n| yreg_series(n, z)).collect();
        let y = yreg
            .iter()
            .zip(&j)
            .map(|(yr, jj)| yr + log_half * jj)
            .collect();
        return Ok(CylinderOrders { j, y, yreg });
    }
    // Reflect into Re z >= 0 so both Hankel expansions are valid.
    let flip = z.re < 0.0;
    let w = if flip { -z } else { z };
    let (h1_0, h2_0) = hankel_asymptotic(0.0, w);
    let (h1_1, h2_1) = hankel_asymptotic(1.0, w);
    let mut j = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let mut y = vec![Complex64::new(0.0, 0.0); n_max + 1];
    j[0] = (h1_0 + h2_0) * 0.5;
    y[0] = (h1_0 - h2_0) / (2.0 * I);
    if n_max >= 1 {
        j[1] = (h1_1 + h2_1) * 0.5;
        y[1] = (h1_1 - h2_1) / (2.0 * I);
    }
    let winv = w.inv();
    for n in 1..n_max {
        y[n + 1] = y[n] * winv * (2.0 * n as f64) - y[n - 1];
    }
    if n_max as f64 >= r * 0.9 && n_max >= 2 {
        miller_j(w, &mut j, h1_0, h2_0, h1_1, h2_1);
    } else {
        for n in 1..n_max {
            j[n + 1] = j[n] * winv * (2.0 * n as f64) - j[n - 1];
        }
    }
    if flip {
        // J_n(-w) = (-1)^n J_n(w); Y_n(-w) = (-1)^n (Y_n(w) + 2i sgn J_n(w)),
        // with the sign chosen so that -w stays on the principal branch.
        let s = if z.im >= 0.0 { 1.0 } else { -1.0 };
        for n in 0..=n_max {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let jn = j[n];
            j[n] = jn * sign;
            y[n] = (y[n] + I * (2.0 * s) * jn) * sign;
        }
    }
    let yreg = y
        .iter()
        .zip(&j)
        .map(|(yy, jj)| yy - log_half * jj)
        .collect();
    Ok(CylinderOrders { j, y, yreg })
}

/// Backward recurrence for `J_n`, normalised to the larger of `J_0`, `J_1`.
fn miller_j(
    w: Complex64,
    j: &mut [Complex64],
    h1_0: Complex64,
    h2_0: Complex64,
    h1_1: Complex64,
    h2_1: Complex64,
) {
    let n_max = j.len() - 1;
    let start = n_max + 30 + w.norm() as usize;
    let winv = w.inv();
    let mut next = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-30, 0.0);
    let mut vals = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for k in (1..=start).rev() {
        let prev = cur * winv * (2.0 * k as f64) - next;
        next = cur;
        cur = prev;
        if cur.norm() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            for v in vals.iter_mut() {
                *v *= 1e-250;
            }
        }
        if k - 1 <= n_max {
            vals[k - 1] = cur;
        }
    }
    let j0 = (h1_0 + h2_0) * 0.5;
    let j1 = (h1_1 + h2_1) * 0.5;
    let scale = if j0.norm() >= j1.norm() {
        j0 / vals[0]
    } else {
        j1 / vals[1]
    };
    for (dst, v) in j.iter_mut().zip(vals) {
        *dst = v * scale;
    }
}

fn reflect_sign(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J_n(z)` for any integer order.
pub fn bessel_j(n: i32, z: Complex64) -> Complex64 {
    let m = n.unsigned_abs() as usize;
    let sign = if n < 0 { reflect_sign(n) } else { 1.0 };
    if z.norm() <= SERIES_RADIUS {
        return j_series(m, z) * sign;
    }
    cylinder_orders(z, m)
        .map(|c| c.j[m] * sign)
        .unwrap_or_default()
}

/// `Y_n(z)` for any integer order.
pub fn bessel_y(n: i32, z: Complex64) -> Result<Complex64> {
    let m = n.unsigned_abs() as usize;
    let sign = if n < 0 { reflect_sign(n) } else { 1.0 };
    Ok(cylinder_orders(z, m)?.y[m] * sign)
}

/// `(H1_n(z), H2_n(z))` for `n >= 0`, with the recessive member accurate
/// even where it is exponentially smaller than `J_n`.
pub fn hankel(n: usize, z: Complex64) -> Result<(Complex64, Complex64)> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("H_n(0)"));
    }
    let r = z.norm();
    let nf = n as f64;
    if r > SERIES_RADIUS.max(nf * nf) && z.re >= 0.0 {
        return Ok(hankel_asymptotic(nf, z));
    }
    let c = cylinder_orders(z, n)?;
    let mut h1 = c.j[n] + I * c.y[n];
    let mut h2 = c.j[n] - I * c.y[n];
    if r <= SERIES_RADIUS.max(nf * nf) {
        if z.im > RECESSIVE_IM {
            h1 = hankel1_integral(n, z);
        } else if z.im < -RECESSIVE_IM {
            h2 = hankel1_integral(n, z.conj()).conj();
        }
    }
    Ok((h1, h2))
}

/// `(e^{-iz} H1_n(z), e^{iz} H2_n(z))`.
pub fn hankel_scaled(n: usize, z: Complex64) -> Result<(Complex64, Complex64)> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularArgument("H_n(0)"));
    }
    let nf = n as f64;
    if z.norm() > SERIES_RADIUS.max(nf * nf) && z.re >= 0.0 {
        let (p, m) = hankel_sums(nf, z);
        let pre = (2.0 / (PI * z)).sqrt();
        let e = Complex64::from_polar(1.0, -(nf * FRAC_PI_2 + FRAC_PI_4));
        return Ok((pre * e * p, pre * e.conj() * m));
    }
    let (h1, h2) = hankel(n, z)?;
    let e = (I * z).exp();
    Ok((h1 / e, h2 * e))
}
