//! Baseline and exact solvers.

mod exact;
mod genetic;
mod greedy;
mod random;

use serde::{Deserialize, Serialize};

use crate::evo::Individual;

pub use exact::{held_karp, solve_exact, solve_exact_with, solve_exhaustive, ExactConfig};
pub use genetic::{order_crossover, random_cut, solve_genetic, swap_mutation, GeneticConfig};
pub use greedy::solve_greedy;
pub use random::{random_route, solve_random};

/// Outcome of an iterative solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub best: Individual,
    /// Best omega after initialization and after each generation.
    pub history: Vec<f64>,
    pub evaluations: u64,
    pub wall_time_s: f64,
}
