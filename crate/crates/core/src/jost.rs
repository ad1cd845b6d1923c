//! Jost functions, the S-matrix and the solver that evaluates them.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{
    build_contour, integrate_ab, integrate_finout, integrate_tilde, zero_im_kr_angle, Contour,
    ContourSettings, DomainPolicy, IntegrationSettings, ThetaPolicy,
};
use crate::error::{Error, Result};
use crate::potential::{Model, UnitSystem};
use crate::riccati::{log_branch_h, PartialWave, RiemannPoint};

pub use crate::contour::in_domain_d;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `|f_in| / |f_out|` below which a point counts as a zero of `f_in`.
pub const POLE_RATIO: f64 = 1e-8;

/// Automatic rotations are not taken closer than this to the imaginary
/// momentum axis; the real axis is used there instead.
const AUTO_ROTATION_LIMIT: f64 = FRAC_PI_2 - 0.2;

/// How a [`JostPair`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JostSource {
    Direct,
    Factorized,
    Expansion { order: usize, e0: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostPair {
    pub f_in: Complex64,
    pub f_out: Complex64,
    pub at: RiemannPoint,
    pub source: JostSource,
}

impl JostPair {
    /// `S = f_out / f_in`. An `f_in` below `1e-8` of `max(|f_out|, 1/2)`
    /// is reported as a spectral point.
    pub fn s_matrix(&self) -> Result<Complex64> {
        if self.f_in.norm() < POLE_RATIO * self.f_out.norm().max(0.5) {
            return Err(Error::SpectralPoint(self.at.energy));
        }
        if !self.f_out.is_finite() {
            return Err(Error::SubdominantOutgoing);
        }
        Ok(self.f_out / self.f_in)
    }
}

/// `k^{2l}` by repeated squaring of `k^2`.
pub(crate) fn k_power(k: Complex64, ell: u32) -> Complex64 {
    (k * k).powu(ell)
}

/// `f_in/out = (at + k^{2l} [h(k) -/+ i] bt) / 2` on the sheet of `at`.
pub fn assemble_jost(
    atilde: Complex64,
    btilde: Complex64,
    pw: PartialWave,
    at: RiemannPoint,
    units: &UnitSystem,
    scale_r: f64,
) -> Result<JostPair> {
    assemble_with_source(
        atilde,
        btilde,
        pw,
        at,
        units,
        scale_r,
        JostSource::Factorized,
    )
}

pub(crate) fn assemble_with_source(
    atilde: Complex64,
    btilde: Complex64,
    pw: PartialWave,
    at: RiemannPoint,
    units: &UnitSystem,
    scale_r: f64,
    source: JostSource,
) -> Result<JostPair> {
    let k = at.momentum(units);
    let h = log_branch_h(k, scale_r, at.branch)?;
    let kb = k_power(k, pw.ell) * btilde;
    Ok(JostPair {
        f_in: (atilde + (h - I) * kb) * 0.5,
        f_out: (atilde + (h + I) * kb) * 0.5,
        at,
        source,
    })
}

/// Everything needed to evaluate Jost functions of one model.
#[derive(Debug, Clone)]
pub struct JostSolver {
    pub model: Model,
    pub contour: ContourSettings,
    pub integration: IntegrationSettings,
    /// `None` picks the rotation per energy (see [`JostSolver::contour_for`]).
    pub theta: Option<ThetaPolicy>,
    pub domain: DomainPolicy,
    pub scale_r: f64,
}

impl JostSolver {
    pub fn new(model: Model) -> Self {
        JostSolver {
            model,
            contour: ContourSettings::default(),
            integration: IntegrationSettings::default(),
            theta: None,
            domain: DomainPolicy::default(),
            scale_r: 1.0,
        }
    }

    pub fn with_tolerance(mut self, rtol: f64) -> Self {
        self.integration = IntegrationSettings::with_tolerance(rtol);
        self
    }

    pub fn units(&self) -> &UnitSystem {
        &self.model.units
    }

    /// Contour for momentum `k`. The automatic choice makes `k r` real and
    /// positive when the potential allows complex radii and `k` lies in the
    /// right half-plane away from the imaginary axis, rotates halfway towards
    /// the negative real `k r` axis in the left half-plane, and otherwise
    /// stays on the real axis. A rotation that carries `arg(k r)` across the cut of
    /// the Hankel functions is rejected.
    pub fn contour_for(&self, k: Complex64) -> Result<Contour> {
        let policy = match self.theta {
            Some(p) => p,
            None => {
                let angle = zero_im_kr_angle(k).ok().filter(|t| {
                    self.model.potential.supports_complex_radius() && t.abs() <= AUTO_ROTATION_LIMIT
                });
                match angle {
                    Some(_) if k.re > 0.0 => ThetaPolicy::ZeroImKr,
                    // Going all the way would put k r on the cut; stop halfway.
                    Some(t) => ThetaPolicy::Fixed(0.5 * t),
                    None => ThetaPolicy::RealAxis,
                }
            }
        };
        let contour = build_contour(k, policy, &self.contour)?;
        if k != Complex64::default() && (k.arg() - contour.theta).abs() >= std::f64::consts::PI {
            return Err(Error::InvalidRotation(contour.theta));
        }
        Ok(contour)
    }

    fn check_winding(at: &RiemannPoint) -> Result<()> {
        if at.branch.winding != 0 {
            return Err(Error::InvalidInput(
                "direct integration only covers the two sheets of the momentum plane; use the factorized route".into(),
            ));
        }
        Ok(())
    }

    /// Jost functions from the `(F_in, F_out)` system.
    pub fn direct(&self, pw: PartialWave, at: RiemannPoint) -> Result<JostPair> {
        Self::check_winding(&at)?;
        let k = at.momentum(self.units());
        if self.model.potential.is_zero() {
            let half = Complex64::new(0.5, 0.0);
            return Ok(JostPair {
                f_in: half,
                f_out: half,
                at,
                source: JostSource::Direct,
            });
        }
        let contour = self.contour_for(k)?;
        let sol = integrate_finout(&self.model, pw, &at, &contour, &self.integration)?;
        Ok(JostPair {
            f_in: sol.values[0],
            f_out: sol.values[1],
            at,
            source: JostSource::Direct,
        })
    }

    /// `(a, b)` of `u -> a j - b y` on the real axis, from the `(A, B)` system.
    pub fn ab(&self, pw: PartialWave, at: RiemannPoint) -> Result<(Complex64, Complex64)> {
        Self::check_winding(&at)?;
        let k = at.momentum(self.units());
        let contour = self.contour_for(k)?;
        Ok(integrate_ab(&self.model, pw, &at, &contour, &self.integration)?.pair())
    }

    /// Single-valued pair `(a~, b~)` at energy `e`.
    pub fn tilde(&self, pw: PartialWave, e: Complex64) -> Result<(Complex64, Complex64)> {
        let contour = self.tilde_contour(e)?;
        let sol = integrate_tilde(
            &self.model,
            pw,
            e,
            &contour,
            self.scale_r,
            self.domain,
            &self.integration,
        )?;
        Ok(sol.pair())
    }

    /// Contour for the k-scaled systems, which only depend on `E`.
    pub(crate) fn tilde_contour(&self, e: Complex64) -> Result<Contour> {
        let k = self.units().k_squared(e).sqrt();
        match self.contour_for(k) {
            Ok(c) => Ok(c),
            Err(Error::InvalidRotation(_)) => Contour::new(0.0, &self.contour),
            Err(e) => Err(e),
        }
    }

    /// Jost functions assembled from `(a~, b~)`; works on every sheet.
    pub fn factorized(&self, pw: PartialWave, at: RiemannPoint) -> Result<JostPair> {
        let (a, b) = self.tilde(pw, at.energy)?;
        assemble_jost(a, b, pw, at, self.units(), self.scale_r)
    }
}

#[cfg(test)]
mod tests;
