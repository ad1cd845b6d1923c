//! Jost functions and their analytic effective-range expansions for
//! two-dimensional scattering by short-range potentials.

// Validation is written as `!(x > 0.0)` so that NaN fails it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod expansion;
pub mod jost;
mod newton;
pub mod potential;
pub mod riccati;
pub mod spectrum;

pub use error::{Error, Result};
pub use expansion::{EffectiveRangeParams, ExpansionSet};
pub use jost::{assemble_jost, JostPair, JostSolver, JostSource};
pub use num_complex::Complex64;
pub use potential::{Model, RadialPotential, UnitSystem};
pub use riccati::{HalfPlane, LogBranch, PartialWave, RiemannPoint};
pub use spectrum::{PhaseShiftCurve, SpectralKind, SpectralPoint};
