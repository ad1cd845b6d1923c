//! Radial potentials and the unit system that turns them into the reduced
//! potential `V(r) = (2 mu / hbar^2) U(r)` entering every radial equation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energy and length units plus the constant `2 mu / hbar^2` expressed in
/// them, so that `k^2 = c2mu * E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub energy_unit_mev: f64,
    pub length_unit_angstrom: f64,
    pub c2mu: f64,
}

/// `hbar^2 / m_e` in meV Angstrom^2 from the CODATA 2010 values of
/// `hbar`, `m_e` and `e`.
pub const HBAR2_OVER_ME_MEV_A2: f64 =
    1.054571726e-34 * 1.054571726e-34 / (9.10938291e-31 * 1.602176565e-22 * 1e-20);

impl UnitSystem {
    /// GaAs donor units: 10.96 meV, 101.89 Angstrom, `mu = 0.063 m_e`.
    /// `c2mu` is what [`UnitSystem::from_physical`] gives for them.
    pub const DONOR: UnitSystem = UnitSystem {
        energy_unit_mev: 10.96,
        length_unit_angstrom: 101.89,
        c2mu: 1.8814440591623736,
    };

    /// Units of `energy_unit_mev` and `length_unit_angstrom` for a particle of
    /// mass `mass_ratio * m_e`.
    pub fn from_physical(
        energy_unit_mev: f64,
        length_unit_angstrom: f64,
        mass_ratio: f64,
    ) -> Result<Self> {
        if !(energy_unit_mev > 0.0 && length_unit_angstrom > 0.0 && mass_ratio > 0.0) {
            return Err(Error::InvalidInput(
                "units and mass must be positive".into(),
            ));
        }
        let hbar2_over_mu =
            HBAR2_OVER_ME_MEV_A2 / mass_ratio / (length_unit_angstrom * length_unit_angstrom);
        Ok(UnitSystem {
            energy_unit_mev,
            length_unit_angstrom,
            c2mu: 2.0 * energy_unit_mev / hbar2_over_mu,
        })
    }

    /// Dimensionless units with `2 mu / hbar^2 = c2mu`.
    pub fn natural(c2mu: f64) -> Self {
        UnitSystem {
            energy_unit_mev: 1.0,
            length_unit_angstrom: 1.0,
            c2mu,
        }
    }

    /// `k^2` at energy `e`.
    pub fn k_squared(&self, e: Complex64) -> Complex64 {
        e * self.c2mu
    }

    /// `hbar^2 / mu`.
    pub fn hbar2_over_mu(&self) -> f64 {
        2.0 / self.c2mu
    }

    /// `mu / hbar^2`.
    pub fn mu_over_hbar2(&self) -> f64 {
        0.5 * self.c2mu
    }

    /// Energy whose momentum squared is `k2`.
    pub fn energy_of_k2(&self, k2: Complex64) -> Complex64 {
        k2 / self.c2mu
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        UnitSystem::DONOR
    }
}

/// Potential given on an increasing real grid, interpolated by a natural
/// cubic spline and continued past the last node by an optional exponential
/// tail `U_last exp(-eta (r - r_last))` (zero without one).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    r: Vec<f64>,
    u: Vec<f64>,
    second: Vec<f64>,
    tail_eta: Option<f64>,
}

impl TabulatedPotential {
    pub fn new(r: Vec<f64>, u: Vec<f64>, tail_eta: Option<f64>) -> Result<Self> {
        if r.len() != u.len() || r.len() < 2 {
            return Err(Error::InvalidInput(
                "tabulated potential needs at least two (r, U) pairs".into(),
            ));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) || r[0] < 0.0 {
            return Err(Error::InvalidInput(
                "tabulated radii must be non-negative and strictly increasing".into(),
            ));
        }
        if let Some(eta) = tail_eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidInput(
                    "tail decay constant must be positive".into(),
                ));
            }
        }
        let second = natural_spline(&r, &u);
        Ok(TabulatedPotential {
            r,
            u,
            second,
            tail_eta,
        })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.u[0];
        }
        if x >= self.r[n - 1] {
            return match self.tail_eta {
                Some(eta) => self.u[n - 1] * (-eta * (x - self.r[n - 1])).exp(),
                None => 0.0,
            };
        }
        let i = self.r.partition_point(|&ri| ri <= x) - 1;
        let h = self.r[i + 1] - self.r[i];
        let a = (self.r[i + 1] - x) / h;
        let b = 1.0 - a;
        a * self.u[i]
            + b * self.u[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior nodes.
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

/// User-supplied potential `U(r)`.
#[derive(Clone)]
pub struct CustomPotential {
    func: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
    analytic: bool,
    eta: Option<f64>,
}

impl CustomPotential {
    /// `analytic` declares that `func` is the analytic continuation of the
    /// potential off the real axis; `eta` is the exponential decay constant
    /// if there is one.
    pub fn new<F>(func: F, analytic: bool, eta: Option<f64>) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        CustomPotential {
            func: Arc::new(func),
            analytic,
            eta,
        }
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential")
            .field("analytic", &self.analytic)
            .field("eta", &self.eta)
            .finish_non_exhaustive()
    }
}

/// Short-range radial potential `U(r)` in energy units.
#[derive(Debug, Clone)]
pub enum RadialPotential {
    /// No interaction at all.
    Zero,
    /// `U(r) = v0 (r - r0) exp(-r / range)`: attractive core, repulsive
    /// barrier, exponential decay with `eta = 1 / range`.
    DotModel {
        v0: f64,
        r0: f64,
        range: f64,
    },
    Tabulated(TabulatedPotential),
    Custom(CustomPotential),
}

impl RadialPotential {
    /// The quantum-dot model with `v0 = 25`, `r0 = 2`, `range = 2` in donor
    /// units.
    pub fn reference_dot() -> Self {
        RadialPotential::DotModel {
            v0: 25.0,
            r0: 2.0,
            range: 2.0,
        }
    }

    pub fn dot_model(v0: f64, r0: f64, range: f64) -> Result<Self> {
        if !(range > 0.0) || !v0.is_finite() || !r0.is_finite() {
            return Err(Error::InvalidInput(
                "dot model needs finite v0, r0 and a positive range".into(),
            ));
        }
        Ok(RadialPotential::DotModel { v0, r0, range })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialPotential::Zero => "zero",
            RadialPotential::DotModel { .. } => "dot-model",
            RadialPotential::Tabulated(_) => "tabulated",
            RadialPotential::Custom(_) => "custom",
        }
    }

    pub fn supports_complex_radius(&self) -> bool {
        match self {
            RadialPotential::Zero | RadialPotential::DotModel { .. } => true,
            RadialPotential::Tabulated(_) => false,
            RadialPotential::Custom(c) => c.analytic,
        }
    }

    /// `U(r)` in energy units.
    pub fn value(&self, r: Complex64) -> Result<Complex64> {
        if r.im != 0.0 && !self.supports_complex_radius() {
            return Err(Error::UnsupportedEvaluation(self.name()));
        }
        Ok(self.value_unchecked(r))
    }

    /// `U(r)` without the complex-radius check; tabulated potentials only
    /// look at `Re r`.
    pub(crate) fn value_unchecked(&self, r: Complex64) -> Complex64 {
        match self {
            RadialPotential::Zero => Complex64::new(0.0, 0.0),
            RadialPotential::DotModel { v0, r0, range } => (r - r0) * (-r / range).exp() * v0,
            RadialPotential::Tabulated(t) => Complex64::new(t.eval(r.re), 0.0),
            RadialPotential::Custom(c) => (c.func)(r),
        }
    }

    /// Exponential decay constant `eta` of the tail, `U ~ exp(-eta r)`.
    /// The zero potential decays infinitely fast.
    pub fn decay_constant(&self) -> Result<f64> {
        match self {
            RadialPotential::Zero => Ok(f64::INFINITY),
            RadialPotential::DotModel { range, .. } => Ok(1.0 / range),
            RadialPotential::Tabulated(t) => t.tail_eta.ok_or(Error::NoExponentialDecay),
            RadialPotential::Custom(c) => c.eta.ok_or(Error::NoExponentialDecay),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, RadialPotential::Zero)
    }
}

/// `V(r) = (2 mu / hbar^2) U(r)`.
pub fn reduced_potential(
    pot: &RadialPotential,
    units: &UnitSystem,
    r: Complex64,
) -> Result<Complex64> {
    Ok(pot.value(r)? * units.c2mu)
}

/// A potential together with the units it is expressed in.
#[derive(Debug, Clone)]
pub struct Model {
    pub potential: RadialPotential,
    pub units: UnitSystem,
}

impl Model {
    pub fn new(potential: RadialPotential, units: UnitSystem) -> Self {
        Model { potential, units }
    }

    /// The quantum-dot reference model in donor units.
    pub fn reference_dot() -> Self {
        Model::new(RadialPotential::reference_dot(), UnitSystem::DONOR)
    }

    pub(crate) fn reduced_unchecked(&self, r: Complex64) -> Complex64 {
        self.potential.value_unchecked(r) * self.units.c2mu
    }
}
