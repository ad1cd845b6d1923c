//! Least-squares fit of real expansion coefficients to a real observable.
//!
//! The coefficients are normalized to `alpha_0 = 1`, since observables only
//! see the ratio of the two series. The remaining `2N + 1` parameters are
//! found by Levenberg-Marquardt from several starts: the zero-potential
//! reference, an optional warm start, and linearized solutions of
//! `sin(delta) a - cos(delta) b = 0`.

use std::f64::consts::{FRAC_2_PI, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExpansionSet, Provenance};
use crate::error::{Error, Result};
use crate::potential::UnitSystem;
use crate::riccati::PartialWave;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    PartialCrossSection,
    PhaseShift,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Fits whose Jacobian condition number exceeds this are rejected.
    pub condition_limit: f64,
    pub warm_start: Option<ExpansionSet>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 300,
            condition_limit: 1e12,
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub set: ExpansionSet,
    /// Weighted residual norm at the solution.
    pub residual_norm: f64,
    /// Condition number of the weighted Jacobian at the solution.
    pub condition: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    data: &'a [(f64, f64)],
    kind: Observable,
    order: usize,
    e0: f64,
    ell: u32,
    eps: f64,
    k: Vec<f64>,
    h: Vec<f64>,
    weight: Vec<f64>,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        2 * self.order + 1
    }

    /// `(tan-numerator, tan-denominator)` = `(B, A)` at data point `i`.
    fn ab(&self, p: &[f64], i: usize) -> (f64, f64) {
        let x = self.data[i].0 - self.e0;
        let n = self.order;
        let mut a = 0.0;
        let mut b = 0.0;
        for m in (0..=n).rev() {
            let am = if m == 0 { 1.0 } else { p[n + m] };
            a = a * x + am;
            b = b * x + p[m];
        }
        let kb = self.k[i].powi(2 * self.ell as i32) * b;
        (kb, a + self.h[i] * kb)
    }

    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        (0..self.data.len())
            .map(|i| {
                let (num, den) = self.ab(p, i);
                let delta = num.atan2(den);
                let value = self.data[i].1;
                let r = match self.kind {
                    Observable::PartialCrossSection => {
                        4.0 * self.eps / self.k[i] * delta.sin().powi(2) - value
                    }
                    Observable::PhaseShift => wrap_half_pi(delta - value),
                };
                r * self.weight[i]
            })
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let m = self.data.len();
        let np = self.n_params();
        let mut jac = DMatrix::zeros(m, np);
        let mut q = p.to_vec();
        for j in 0..np {
            let h = 1e-6 * p[j].abs().max(1e-2);
            q[j] = p[j] + h;
            let rp = self.residuals(&q);
            q[j] = p[j] - h;
            let rm = self.residuals(&q);
            q[j] = p[j];
            for i in 0..m {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        jac
    }

    /// Net change of the phase shift (mod pi) across the data window.
    fn phase_advance(&self, p: &[f64]) -> f64 {
        let delta: Vec<f64> = (0..self.data.len())
            .map(|i| {
                let (num, den) = self.ab(p, i);
                num.atan2(den)
            })
            .collect();
        delta.windows(2).map(|w| wrap_half_pi(w[1] - w[0])).sum()
    }

    fn cost(&self, p: &[f64]) -> f64 {
        self.residuals(p).iter().map(|r| r * r).sum::<f64>()
    }

    /// Least-squares solution of `sin(d) a - cos(d) b = 0` for given
    /// `(sin d, cos d)` per data point.
    fn linearized(&self, sc: &[(f64, f64)]) -> Option<Vec<f64>> {
        let n = self.order;
        let m = self.data.len();
        let mut mat = DMatrix::zeros(m, self.n_params());
        let mut rhs = DVector::zeros(m);
        for i in 0..m {
            let (s, c) = sc[i];
            let x = self.data[i].0 - self.e0;
            let k2l = self.k[i].powi(2 * self.ell as i32);
            let coef_b = (s * self.h[i] - c) * k2l;
            for j in 0..=n {
                mat[(i, j)] = coef_b * x.powi(j as i32);
                if j > 0 {
                    mat[(i, n + j)] = s * x.powi(j as i32);
                }
            }
            rhs[i] = -s;
        }
        let sol = mat.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let v: Vec<f64> = sol.iter().copied().collect();
        v.iter().all(|x| x.is_finite()).then_some(v)
    }

    fn levenberg_marquardt(&self, start: Vec<f64>, max_iter: usize) -> (Vec<f64>, f64, usize) {
        let mut p = start;
        let mut r = DVector::from_vec(self.residuals(&p));
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        let mut iters = 0;
        for it in 1..=max_iter {
            iters = it;
            let jac = self.jacobian(&p);
            let jtj = jac.transpose() * &jac;
            let g = jac.transpose() * &r;
            let mut improved = false;
            for _ in 0..12 {
                let mut a = jtj.clone();
                for d in 0..a.nrows() {
                    a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
                }
                let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let tr = DVector::from_vec(self.residuals(&trial));
                let tc = tr.norm_squared();
                if tc.is_finite() && tc < cost {
                    let rel = (cost - tc) / cost.max(1e-300);
                    let small =
                        step.norm() <= 1e-13 * (1.0 + DVector::from_column_slice(&p).norm());
                    p = trial;
                    r = tr;
                    cost = tc;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    if rel < 1e-15 || small {
                        return (p, cost, iters);
                    }
                    break;
                }
                lambda *= 4.0;
            }
            if !improved || cost < 1e-30 {
                break;
            }
        }
        (p, cost, iters)
    }
}

fn wrap_half_pi(x: f64) -> f64 {
    x - PI * (x / PI).round()
}

/// Moving average over three points.
fn smooth(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(v.len() - 1);
            v[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// Fit `alpha_n`, `beta_n` (`alpha_0 = 1`) about the real energy `e0` to
/// samples `(E, observable)` with `E > 0`.
#[allow(clippy::too_many_arguments)]
pub fn fit_coefficients(
    data: &[(f64, f64)],
    pw: PartialWave,
    e0: f64,
    order: usize,
    kind: Observable,
    units: &UnitSystem,
    scale_r: f64,
    opts: &FitOptions,
) -> Result<FitReport> {
    if data.len() < 2 * (order + 1) {
        return Err(Error::InvalidInput(format!(
            "fit of order {order} needs at least {} data points",
            2 * (order + 1)
        )));
    }
    let mut data = data.to_vec();
    if data.iter().any(|&(e, v)| !(e > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "fit data need finite observables at positive energies".into(),
        ));
    }
    data.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k: Vec<f64> = data.iter().map(|&(e, _)| (units.c2mu * e).sqrt()).collect();
    let h: Vec<f64> = k
        .iter()
        .map(|&k| FRAC_2_PI * (k * scale_r / 2.0).ln())
        .collect();
    let weight = match kind {
        Observable::PhaseShift => vec![1.0; data.len()],
        Observable::PartialCrossSection => {
            let mean = data.iter().map(|d| d.1.abs()).sum::<f64>() / data.len() as f64;
            data.iter()
                .map(|d| 1.0 / (d.1.abs() + 0.1 * mean).max(1e-300))
                .collect()
        }
    };
    let prob = Problem {
        data: &data,
        kind,
        order,
        e0,
        ell: pw.ell,
        eps: pw.epsilon(),
        k,
        h,
        weight,
    };
    let np = prob.n_params();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    // Zero-potential reference: alpha = delta_{n0}, beta = 0.
    starts.push(vec![0.0; np]);
    if let Some(w) = &opts.warm_start {
        let w = w.normalized()?;
        if w.order >= order {
            let mut p = vec![0.0; np];
            for j in 0..=order {
                p[j] = w.beta[j].re;
                if j > 0 {
                    p[order + j] = w.alpha[j].re;
                }
            }
            starts.push(p);
        }
    }
    let mut linear: Vec<(f64, Vec<f64>)> = Vec::new();
    match kind {
        Observable::PhaseShift => {
            let sc: Vec<(f64, f64)> = data.iter().map(|d| (d.1.sin(), d.1.cos())).collect();
            if let Some(p) = prob.linearized(&sc) {
                linear.push((prob.cost(&p), p));
            }
        }
        Observable::PartialCrossSection => {
            let s: Vec<f64> = data
                .iter()
                .zip(&prob.k)
                .map(|(d, &k)| (d.1 * k / (4.0 * prob.eps)).clamp(0.0, 1.0).sqrt())
                .collect();
            // cos(delta) changes sign where sin^2(delta) passes 1 or 0.
            let sm = smooth(&s);
            let mut flips: Vec<(f64, usize)> = (1..sm.len() - 1)
                .filter_map(|i| {
                    if sm[i] >= sm[i - 1] && sm[i] >= sm[i + 1] && sm[i] > 0.8 {
                        Some((1.0 - sm[i], i))
                    } else if sm[i] <= sm[i - 1] && sm[i] <= sm[i + 1] && sm[i] < 0.4 {
                        Some((sm[i], i))
                    } else {
                        None
                    }
                })
                .collect();
            flips.sort_by(|a, b| a.0.total_cmp(&b.0));
            flips.truncate(6);
            let mut at: Vec<usize> = flips.into_iter().map(|f| f.1).collect();
            at.sort_unstable();
            for mask in 0..(1u32 << (at.len() + 1)) {
                let mut sign = if mask & 1 == 0 { 1.0 } else { -1.0 };
                let mut sc = Vec::with_capacity(s.len());
                for (i, &si) in s.iter().enumerate() {
                    if let Some(pos) = at.iter().position(|&a| a == i) {
                        if mask & (2 << pos) != 0 {
                            sign = -sign;
                        }
                    }
                    sc.push((si, sign * (1.0 - si * si).max(0.0).sqrt()));
                }
                if let Some(p) = prob.linearized(&sc) {
                    linear.push((prob.cost(&p), p));
                }
            }
        }
    }
    linear.sort_by(|a, b| a.0.total_cmp(&b.0));
    starts.extend(linear.into_iter().take(6).map(|l| l.1));

    let fits: Vec<(Vec<f64>, f64, usize)> = starts
        .into_iter()
        .map(|s| prob.levenberg_marquardt(s, opts.max_iter))
        .filter(|f| f.1.is_finite())
        .collect();
    let min_cost = fits
        .iter()
        .map(|f| f.1)
        .min_by(|a, b| a.total_cmp(b))
        .ok_or_else(|| Error::NoConvergence("no fit start produced a finite misfit".into()))?;
    // Cross sections cannot tell delta from -delta. Among fits that explain
    // the data about equally well, prefer the one whose phase rises (a
    // positive time delay), which is what a resonance produces.
    let tie = 1.5 * min_cost + 1e-20;
    let (p, cost, iterations) = fits
        .into_iter()
        .filter(|f| f.1 <= tie)
        .map(|f| (prob.phase_advance(&f.0), f))
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1 .1.total_cmp(&a.1 .1)))
        .map(|(_, f)| f)
        .expect("the minimum-cost fit passes the tie test");
    let sv = prob.jacobian(&p).singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= opts.condition_limit) {
        return Err(Error::IllConditionedFit { condition });
    }
    let alpha: Vec<Complex64> = (0..=order)
        .map(|j| Complex64::new(if j == 0 { 1.0 } else { p[order + j] }, 0.0))
        .collect();
    let beta: Vec<Complex64> = (0..=order).map(|j| Complex64::new(p[j], 0.0)).collect();
    let set = ExpansionSet::from_coefficients(
        pw,
        Complex64::new(e0, 0.0),
        alpha,
        beta,
        scale_r,
        *units,
        Provenance {
            theta: 0.0,
            r_max: 0.0,
            rtol: 0.0,
            atol: 0.0,
            steps: 0,
            r_end: Complex64::default(),
            fitted: true,
        },
    )?;
    Ok(FitReport {
        set,
        residual_norm: cost.sqrt(),
        condition,
        iterations,
    })
}
