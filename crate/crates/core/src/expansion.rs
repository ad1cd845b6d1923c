//! Energy expansions of the single-valued Jost parts: approximate Jost
//! functions, the effective-range function and its low-energy parameters,
//! and fits of the expansion coefficients to scattering data.

mod fit;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::integrate_expansion;
use crate::error::{Error, Result};
use crate::jost::{assemble_with_source, JostPair, JostSolver, JostSource};
use crate::newton::{newton, NewtonOptions};
use crate::potential::UnitSystem;
use crate::riccati::{HalfPlane, PartialWave, RiemannPoint};

pub use fit::{fit_coefficients, FitOptions, FitReport, Observable};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// How an [`ExpansionSet`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub theta: f64,
    pub r_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub steps: usize,
    pub r_end: Complex64,
    /// Set for coefficients obtained by fitting rather than integration.
    pub fitted: bool,
}

/// Taylor coefficients of `a~(E)` and `b~(E)` about `e0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSet {
    pub ell: u32,
    pub e0: Complex64,
    pub order: usize,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub scale_r: f64,
    pub units: UnitSystem,
    pub provenance: Provenance,
}

impl ExpansionSet {
    /// Builds a set from coefficient lists of equal length `order + 1`.
    pub fn from_coefficients(
        pw: PartialWave,
        e0: Complex64,
        alpha: Vec<Complex64>,
        beta: Vec<Complex64>,
        scale_r: f64,
        units: UnitSystem,
        provenance: Provenance,
    ) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(Error::InvalidInput(
                "alpha and beta need the same nonzero length".into(),
            ));
        }
        Ok(ExpansionSet {
            ell: pw.ell,
            e0,
            order: alpha.len() - 1,
            alpha,
            beta,
            scale_r,
            units,
            provenance,
        })
    }

    pub fn partial_wave(&self) -> PartialWave {
        PartialWave::new(self.ell)
    }

    /// Truncated series `(a~, b~)` at `e`.
    pub fn tilde_at(&self, e: Complex64) -> (Complex64, Complex64) {
        let x = e - self.e0;
        let horner = |c: &[Complex64]| {
            c.iter()
                .rev()
                .fold(Complex64::default(), |acc, &v| acc * x + v)
        };
        (horner(&self.alpha), horner(&self.beta))
    }

    /// Approximate Jost functions at `at`.
    pub fn approx_jost(&self, at: RiemannPoint) -> Result<JostPair> {
        let (a, b) = self.tilde_at(at.energy);
        assemble_with_source(
            a,
            b,
            self.partial_wave(),
            at,
            &self.units,
            self.scale_r,
            JostSource::Expansion {
                order: self.order,
                e0: self.e0,
            },
        )
    }

    /// Copy truncated to `order` (no-op if already shorter).
    pub fn truncated(&self, order: usize) -> Self {
        let n = order.min(self.order) + 1;
        ExpansionSet {
            order: n - 1,
            alpha: self.alpha[..n].to_vec(),
            beta: self.beta[..n].to_vec(),
            ..self.clone()
        }
    }

    /// Copy scaled so that `alpha_0 = 1`; observables do not change.
    pub fn normalized(&self) -> Result<Self> {
        let a0 = self.alpha[0];
        if a0 == Complex64::default() {
            return Err(Error::ZeroEnergyPole);
        }
        Ok(ExpansionSet {
            alpha: self.alpha.iter().map(|v| v / a0).collect(),
            beta: self.beta.iter().map(|v| v / a0).collect(),
            ..self.clone()
        })
    }

    /// Zero of the approximate `f_in` on `branch`, by Newton from `seed`.
    /// On the lower half-plane sheet iterates are kept at `Im E <= 0`.
    pub fn find_root(
        &self,
        seed: Complex64,
        branch: crate::riccati::LogBranch,
    ) -> Result<Complex64> {
        let lower = branch.half_plane == HalfPlane::Lower;
        let res = newton(
            |e| Ok(self.approx_jost(RiemannPoint::new(e, branch))?.f_in),
            seed,
            &NewtonOptions {
                step_tol: 1e-14,
                noise_tol: 1e-12,
                ..Default::default()
            },
            |e| {
                if lower && e.im > 0.0 {
                    Complex64::new(e.re, 0.0)
                } else {
                    e
                }
            },
        )?;
        Ok(res.root)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expansion sets always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: ExpansionSet = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("expansion file: {e}")))?;
        if set.alpha.len() != set.order + 1 || set.beta.len() != set.order + 1 {
            return Err(Error::InvalidInput(
                "expansion file: coefficient lists do not match the order".into(),
            ));
        }
        Ok(set)
    }
}

/// Expansion of `(a~, b~)` about `e0` to `order`, integrated on the contour
/// that makes `k0 r` real where possible.
pub fn expand(
    solver: &JostSolver,
    pw: PartialWave,
    e0: Complex64,
    order: usize,
) -> Result<ExpansionSet> {
    let contour = solver.tilde_contour(e0)?;
    let sol = integrate_expansion(
        &solver.model,
        pw,
        e0,
        order,
        &contour,
        solver.scale_r,
        solver.domain,
        &solver.integration,
    )?;
    let (alpha, beta) = sol.values.split_at(order + 1);
    ExpansionSet::from_coefficients(
        pw,
        e0,
        alpha.to_vec(),
        beta.to_vec(),
        solver.scale_r,
        solver.model.units,
        Provenance {
            theta: contour.theta,
            r_max: solver.contour.r_max,
            rtol: solver.integration.rtol,
            atol: solver.integration.atol,
            steps: sol.diagnostics.steps,
            r_end: sol.diagnostics.r_end,
            fitted: false,
        },
    )
}

/// Approximate Jost functions from a truncated expansion.
pub fn approx_jost(set: &ExpansionSet, at: RiemannPoint) -> Result<JostPair> {
    set.approx_jost(at)
}

/// `a~ / b~ = k^{2l} [cot delta - h(k)]`, single-valued in `E`.
pub fn effective_range_function(
    solver: &JostSolver,
    pw: PartialWave,
    e: Complex64,
) -> Result<Complex64> {
    let (a, b) = solver.tilde(pw, e)?;
    if b.norm() <= 1e-14 * a.norm() {
        return Err(Error::EffectiveRangePole);
    }
    Ok(a / b)
}

/// Low-energy parameters of `k^{2l}[cot delta - h] = -1/a + r0 k^2 / 2 + ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRangeParams {
    pub ell: u32,
    /// Scattering length (dimensionless for `l = 0`).
    pub a: f64,
    /// Effective radius (length squared for `l = 0`).
    pub r0: f64,
    /// `a'` of `cot delta = (2/pi)(gamma + ln(k a'/2)) + ...`; `l = 0` only.
    pub a_log: Option<f64>,
    /// `a''` with `ln a' = -pi / a''`; `l = 0` only.
    pub a_inv_log: Option<f64>,
    pub scale_r: f64,
}

impl EffectiveRangeParams {
    /// `cot delta` from `a` and `r0`: `h(k) + k^{-2l}(-1/a + r0 k^2 / 2)`.
    pub fn cot_delta(&self, k: f64) -> f64 {
        let h = std::f64::consts::FRAC_2_PI * (k * self.scale_r / 2.0).ln();
        h + (-1.0 / self.a + 0.5 * self.r0 * k * k) / k.powi(2 * self.ell as i32)
    }

    /// `cot delta` to leading order from `a'`.
    pub fn cot_delta_log_form(&self, k: f64) -> Option<f64> {
        self.a_log
            .map(|ap| std::f64::consts::FRAC_2_PI * (EULER_GAMMA + (k * ap / 2.0).ln()))
    }
}

/// Scattering length and effective radius from an expansion about `E = 0`.
pub fn effective_range_params(set: &ExpansionSet) -> Result<EffectiveRangeParams> {
    if set.e0 != Complex64::default() {
        return Err(Error::InvalidInput(
            "effective-range parameters need an expansion about E = 0".into(),
        ));
    }
    if set.order < 1 {
        return Err(Error::InvalidInput(
            "effective-range parameters need order >= 1".into(),
        ));
    }
    let (a0, a1) = (set.alpha[0], set.alpha[1]);
    let (b0, b1) = (set.beta[0], set.beta[1]);
    if a0.norm() <= 1e-14 * b0.norm() || a0 == Complex64::default() {
        return Err(Error::ZeroEnergyPole);
    }
    if b0.norm() <= 1e-14 * a0.norm() {
        return Err(Error::NoLowEnergyScattering);
    }
    let a = (-b0 / a0).re;
    let r0 = (set.units.hbar2_over_mu() * (a1 / b0 - a0 * b1 / (b0 * b0))).re;
    let (a_log, a_inv_log) = if set.ell == 0 {
        let ap = set.scale_r * (-std::f64::consts::PI / (2.0 * a) - EULER_GAMMA).exp();
        (Some(ap), Some(-std::f64::consts::PI / ap.ln()))
    } else {
        (None, None)
    };
    Ok(EffectiveRangeParams {
        ell: set.ell,
        a,
        r0,
        a_log,
        a_inv_log,
        scale_r: set.scale_r,
    })
}
