//! Shared setup for the benchmarks.

use jost_core::{JostSolver, Model, RadialPotential, UnitSystem};

/// The quantum-dot model in donor units with default solver settings.
pub fn dot_solver() -> JostSolver {
    let potential = RadialPotential::dot_model(25.0, 2.0, 2.0).expect("valid dot model");
    JostSolver::new(Model::new(potential, UnitSystem::DONOR))
}
