//! Energy power series of the k-scaled Riccati functions.
//!
//! `jt(E, r) = sum_n (c2mu E)^n f_n(r)` and `yt(E, r) = sum_n (c2mu E)^n g_n(r)`
//! are entire in `E`, so their Taylor coefficients about any `E0` follow by
//! binomial re-expansion. This is the accurate route whenever `|k0 r|` is
//! small, including `E0 = 0`.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use super::bessel::{digamma_int, factorial};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `f_n(r) = sqrt(pi) (-1)^n / (n! (n+l)!) (r/2)^(2n + l + 1/2)`.
pub fn fcoeff(ell: u32, n: u32, r: Complex64) -> Complex64 {
    let w = r * 0.5;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    w.sqrt() * w.powi((2 * n + ell) as i32) * (SQRT_PI * sign)
        / (factorial(n as usize) * factorial((n + ell) as usize))
}

/// `g_n(r)`, the coefficient of `(c2mu E)^n` in `yt`, with the logarithm
/// measured against `scale_r`.
pub fn gcoeff(ell: u32, n: u32, r: Complex64, scale_r: f64) -> Complex64 {
    let w = r * 0.5;
    let s = w.sqrt();
    let (l, n_) = (ell as i32, n as i32);
    if n < ell {
        return -s
            * w.powi(2 * n_ - l)
            * (factorial((ell - n - 1) as usize) / (SQRT_PI * factorial(n as usize)));
    }
    let m = n - ell;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let psi = digamma_int(n as usize + 1) + digamma_int(m as usize + 1);
    let log_part = (r / scale_r).ln() * FRAC_2_PI * fcoeff(ell, m, r);
    log_part
        - s * w.powi(2 * n_ - l)
            * (sign * psi / (SQRT_PI * factorial(n as usize) * factorial(m as usize)))
}

/// `sum_{n >= n0} C(n, m) mx^(n - m) weight(n)`, summed until the terms die.
fn binomial_tail(m: usize, n0: usize, mx: Complex64, weight: impl Fn(usize) -> f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for n in m + 1..=n0 {
        binom *= n as f64 / (n - m) as f64;
    }
    let mut p = mx.powi((n0 - m) as i32);
    let mut small = 0;
    for n in n0..n0 + 120 {
        let term = p * (binom * weight(n));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() || p == Complex64::new(0.0, 0.0) {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
        p *= mx;
        binom *= (n + 1) as f64 / (n + 1 - m) as f64;
    }
    sum
}

/// Taylor coefficients `s_m = (1/m!) d^m jt / dE^m` and
/// `c_m = (1/m!) d^m yt / dE^m` at `E0`, `m = 0..=n_max`.
pub fn small_argument_derivatives(
    ell: u32,
    e0: Complex64,
    r: Complex64,
    c2mu: f64,
    scale_r: f64,
    n_max: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let l = ell as usize;
    let w = r * 0.5;
    let s = w.sqrt();
    let u = w * w * c2mu;
    let mx = -(u * e0);
    let log = (r / scale_r).ln() * FRAC_2_PI;
    let a = s * w.powi(ell as i32) * SQRT_PI;
    let yt_pre = -s * w.powi(-(ell as i32)) / SQRT_PI * if l % 2 == 0 { 1.0 } else { -1.0 };
    let c2mu_l = c2mu.powi(ell as i32);

    let mut svec = Vec::with_capacity(n_max + 1);
    let mut cvec = Vec::with_capacity(n_max + 1);
    for m in 0..=n_max {
        let um = (-u).powi(m as i32);
        let sm = a * um * binomial_tail(m, m, mx, |n| 1.0 / (factorial(n) * factorial(n + l)));
        svec.push(sm);

        let mut cm = Complex64::new(0.0, 0.0);
        for n in m..l {
            cm += -s
                * w.powi(2 * n as i32 - ell as i32)
                * (c2mu.powi(n as i32) * factorial(l - n - 1) / (SQRT_PI * factorial(n)))
                * binomial_coefficient(n, m)
                * e0.powi((n - m) as i32);
        }
        let n0 = m.max(l);
        // (-u)^(n - l) written as (-u)^(m - l) (-u)^(n - m).
        let log_part = binomial_tail(m, n0, mx, |n| 1.0 / (factorial(n - l) * factorial(n)))
            * (-u).powi(m as i32 - ell as i32)
            * (a * c2mu_l)
            * log;
        let psi_part = binomial_tail(m, n0, mx, |n| {
            (digamma_int(n + 1) + digamma_int(n - l + 1)) / (factorial(n) * factorial(n - l))
        }) * um
            * yt_pre;
        cm += log_part + psi_part;
        cvec.push(cm);
    }
    (svec, cvec)
}

fn binomial_coefficient(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

/// `(jt, yt)` of order `ell` from the energy series.
pub(crate) fn tilde_series(
    ell: u32,
    e: Complex64,
    r: Complex64,
    c2mu: f64,
    scale_r: f64,
) -> (Complex64, Complex64) {
    let (s, c) = small_argument_derivatives(ell, e, r, c2mu, scale_r, 0);
    (s[0], c[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fcoeff_matches_closed_form() {
        // f_0 for l = 0 at r = 2: sqrt(pi) * 1.
        assert!((fcoeff(0, 0, c(2.0, 0.0)) - c(SQRT_PI, 0.0)).norm() < 1e-15);
        // f_1 for l = 1 at r = 2: sqrt(pi) (-1) / (1! 2!).
        assert!((fcoeff(1, 1, c(2.0, 0.0)) - c(-SQRT_PI / 2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gcoeff_reference_values() {
        // l = 0, n = 0, r = R = 1: only the psi term survives,
        // -2 psi(1) (1/2)^(1/2) / sqrt(pi) = 2 gamma / sqrt(2 pi).
        let g = gcoeff(0, 0, c(1.0, 0.0), 1.0);
        let expect = 2.0 * super::super::bessel::EULER_GAMMA / (2.0 * PI).sqrt();
        assert!((g.re - expect).abs() < 1e-15 && g.im == 0.0);
        assert!((g.re - 0.460_55).abs() < 1e-5);
        // l = 2, n = 0 finite part: -(1)! / sqrt(pi) (r/2)^(-3/2).
        let g = gcoeff(2, 0, c(2.0, 0.0), 1.0);
        assert!((g.re + 1.0 / SQRT_PI).abs() < 1e-15);
    }

    #[test]
    fn series_sums_agree_with_coefficients() {
        for ell in 0..4u32 {
            let r = c(1.3, -0.4);
            let e = c(0.7, 0.2);
            let c2mu = 2.0;
            let (jt, yt) = tilde_series(ell, e, r, c2mu, 2.0);
            let mut js = c(0.0, 0.0);
            let mut ys = c(0.0, 0.0);
            for n in 0..40 {
                let p = (e * c2mu).powi(n as i32);
                js += p * fcoeff(ell, n, r);
                ys += p * gcoeff(ell, n, r, 2.0);
            }
            assert!((jt - js).norm() < 1e-13 * js.norm(), "l = {ell}");
            assert!((yt - ys).norm() < 1e-13 * ys.norm(), "l = {ell}");
        }
    }

    #[test]
    fn derivatives_at_zero_are_scaled_coefficients() {
        let r = c(1.7, 0.0);
        for ell in 0..3u32 {
            let (s, cc) = small_argument_derivatives(ell, c(0.0, 0.0), r, 2.0, 2.0, 4);
            for n in 0..=4u32 {
                let scale = 2.0f64.powi(n as i32);
                assert!((s[n as usize] - fcoeff(ell, n, r) * scale).norm() < 1e-14);
                assert!((cc[n as usize] - gcoeff(ell, n, r, 2.0) * scale).norm() < 1e-14);
            }
        }
    }
}
