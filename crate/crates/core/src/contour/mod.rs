//! Integration contours and the radial coefficient systems integrated along
//! them.

mod dopri;
mod systems;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::UnitSystem;

pub use dopri::{Diagnostics, IntegrationSettings, TailControl, TracePoint};
pub use systems::{
    integrate_ab, integrate_expansion, integrate_finout, integrate_tilde, DomainPolicy,
    RadialSolution, SystemKind,
};

/// The ray `r = t e^{-i theta}`, `t` from `r_start` to at most
/// `r_max_modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub r_start: f64,
    pub theta: f64,
    pub r_max_modulus: f64,
    pub tail: Option<TailControl>,
}

impl Contour {
    pub fn new(theta: f64, settings: &ContourSettings) -> Result<Self> {
        if !(theta.abs() < FRAC_PI_2) {
            return Err(Error::InvalidRotation(theta));
        }
        if !(settings.r_start > 0.0 && settings.r_start < settings.r_max) {
            return Err(Error::InvalidInput(
                "contour needs 0 < r_start < r_max".into(),
            ));
        }
        let nominal = settings.r_max / theta.cos();
        let tail = settings.adaptive_tail.then_some(TailControl {
            tol: settings.tail_tol,
            min_modulus: 0.5 * nominal,
            components: None,
        });
        let r_max_modulus = if settings.adaptive_tail {
            nominal * settings.max_extension
        } else {
            nominal
        };
        Ok(Contour {
            r_start: settings.r_start,
            theta,
            r_max_modulus,
            tail,
        })
    }

    /// Point of the ray at modulus `t`.
    pub fn point(&self, t: f64) -> Complex64 {
        Complex64::from_polar(t, -self.theta)
    }
}

/// How the rotation angle is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaPolicy {
    RealAxis,
    /// `theta = arg k`, folded into `(-pi/2, pi/2)`, so that `k r` is real.
    ZeroImKr,
    Fixed(f64),
}

/// Knobs shared by every contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSettings {
    pub r_start: f64,
    /// Real part of the radius where the potential is taken as negligible.
    pub r_max: f64,
    pub adaptive_tail: bool,
    pub tail_tol: f64,
    /// With an adaptive tail, integration may run to `max_extension` times
    /// the nominal end before giving up on the tail criterion.
    pub max_extension: f64,
}

impl Default for ContourSettings {
    fn default() -> Self {
        ContourSettings {
            r_start: 1e-8,
            r_max: 70.0,
            adaptive_tail: true,
            tail_tol: 1e-14,
            max_extension: 10.0,
        }
    }
}

/// Rotation angle making `k r` real.
pub fn zero_im_kr_angle(k: Complex64) -> Result<f64> {
    let mut a = k.arg();
    if a > FRAC_PI_2 {
        a -= std::f64::consts::PI;
    } else if a <= -FRAC_PI_2 {
        a += std::f64::consts::PI;
    }
    if a.abs() >= FRAC_PI_2 - 1e-9 {
        return Err(Error::InvalidRotation(a));
    }
    Ok(a)
}

/// Contour for an energy whose momentum on the relevant sheet is `k`.
pub fn build_contour(
    k: Complex64,
    policy: ThetaPolicy,
    settings: &ContourSettings,
) -> Result<Contour> {
    let theta = match policy {
        ThetaPolicy::RealAxis => 0.0,
        ThetaPolicy::ZeroImKr => {
            if k == Complex64::new(0.0, 0.0) {
                0.0
            } else {
                zero_im_kr_angle(k)?
            }
        }
        ThetaPolicy::Fixed(t) => t,
    };
    Contour::new(theta, settings)
}

/// Whether the k-scaled coefficient functions stay bounded against a tail
/// `exp(-eta r)` along the ray of angle `-theta`:
/// `|2 Im(k r)| < eta Re r`.
pub fn in_domain_d(e: Complex64, eta: f64, theta: f64, units: &UnitSystem) -> Result<bool> {
    if !(eta > 0.0) {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    if !(theta.abs() < FRAC_PI_2) {
        return Err(Error::InvalidRotation(theta));
    }
    if eta.is_infinite() || e.norm() == 0.0 {
        return Ok(true);
    }
    let h2_mu = units.hbar2_over_mu();
    if theta == 0.0 {
        // (Im E)^2 < hbar^4 eta^4 / (16 mu^2) + hbar^2 eta^2 / (2 mu) Re E
        let a = h2_mu * eta * eta;
        return Ok(e.im * e.im < a * a / 16.0 + 0.5 * a * e.re);
    }
    let chi = e.arg();
    let s = (0.5 * chi - theta).sin();
    Ok(s * s < h2_mu * eta * eta * theta.cos().powi(2) / (8.0 * e.norm()))
}
