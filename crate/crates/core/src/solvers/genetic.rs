//! Classical permutation GA: tournament selection, order crossover, swap
//! mutation and single-elite generational replacement.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::random::random_route;
use super::SolverRun;
use crate::error::{Error, Result};
use crate::evo::Individual;
use crate::model::Route;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneticConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for GeneticConfig {
    fn default() -> Self {
        GeneticConfig {
            population_size: 50,
            generations: 500,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            tournament_size: 3,
            seed: 0,
        }
    }
}

impl GeneticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 || self.tournament_size == 0 {
            return Err(Error::param("population and tournament sizes must be at least 1"));
        }
        for (name, p) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{name} must be within [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Uniform cut `(i, j)` over 1-based interior positions with `i < j`.
/// Requires `n >= 2`.
pub fn random_cut<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    assert!(n >= 2, "order crossover needs at least two interior positions");
    loop {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        if a != b {
            return (a.min(b), a.max(b));
        }
    }
}

/// Order crossover on route interiors. The child keeps `p1`'s positions
/// `i..=j` (1-based, interior) in place; the other positions are filled with
/// `p2`'s nodes in `p2` order, starting after `j` and wrapping around.
pub fn order_crossover(p1: &Route, p2: &Route, cut: (usize, usize)) -> Result<Route> {
    let n = p1.n();
    if p2.n() != n {
        return Err(Error::param(format!(
            "parents cover different node sets ({n} and {} nodes)",
            p2.n()
        )));
    }
    let (i, j) = cut;
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::param(format!("cut ({i}, {j}) must satisfy 1 <= i < j <= {n}")));
    }
    let a = p1.interior_indices();
    let b = p2.interior_indices();
    let (lo, hi) = (i - 1, j - 1);

    let mut child = vec![0usize; n];
    let mut used = vec![false; n + 1];
    for k in lo..=hi {
        child[k] = a[k];
        used[a[k]] = true;
    }
    let mut slot = (hi + 1) % n;
    for step in 0..n {
        let node = b[(hi + 1 + step) % n];
        if used[node] {
            continue;
        }
        child[slot] = node;
        used[node] = true;
        slot = (slot + 1) % n;
    }
    Ok(Route::from_interior(&child).expect("order crossover preserves the permutation"))
}

/// Exchanges two distinct interior positions.
pub fn swap_mutation<R: Rng + ?Sized>(route: &Route, rng: &mut R) -> Route {
    let mut interior = route.interior_indices();
    if interior.len() >= 2 {
        let (a, b) = random_cut(interior.len(), rng);
        interior.swap(a - 1, b - 1);
    }
    Route::from_interior(&interior).expect("swap preserves the permutation")
}

fn tournament<'a, R: Rng + ?Sized>(population: &'a [Individual], size: usize, rng: &mut R) -> &'a Individual {
    let mut best = &population[rng.random_range(0..population.len())];
    for _ in 1..size {
        let other = &population[rng.random_range(0..population.len())];
        if other.omega < best.omega {
            best = other;
        }
    }
    best
}

fn best_of(population: &[Individual]) -> &Individual {
    population
        .iter()
        .min_by(|a, b| a.omega.total_cmp(&b.omega))
        .expect("population is non-empty")
}

pub fn solve_genetic(scenario: &Scenario, config: &GeneticConfig) -> Result<SolverRun> {
    config.validate()?;
    let started = Instant::now();
    let n = scenario.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluations = 0u64;
    let mut evaluate = |route: Route| -> Result<Individual> {
        evaluations += 1;
        Individual::evaluate(scenario, route)
    };

    let mut population = (0..config.population_size)
        .map(|_| evaluate(random_route(n, &mut rng)))
        .collect::<Result<Vec<_>>>()?;
    let mut history = Vec::with_capacity(config.generations + 1);
    history.push(best_of(&population).omega);

    for _ in 0..config.generations {
        let elite = best_of(&population).clone();
        let mut next = Vec::with_capacity(config.population_size);
        next.push(elite);
        while next.len() < config.population_size {
            let p1 = tournament(&population, config.tournament_size, &mut rng);
            let p2 = tournament(&population, config.tournament_size, &mut rng);
            let mut child = if n >= 2 && rng.random_bool(config.crossover_rate) {
                order_crossover(&p1.route, &p2.route, random_cut(n, &mut rng))?
            } else {
                p1.route.clone()
            };
            if n >= 2 && rng.random_bool(config.mutation_rate) {
                child = swap_mutation(&child, &mut rng);
            }
            next.push(evaluate(child)?);
        }
        population = next;
        history.push(best_of(&population).omega);
    }

    Ok(SolverRun {
        best: best_of(&population).clone(),
        history,
        evaluations,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evo::{verify, CandidateIndividual};
    use crate::fixtures::triangle;
    use proptest::prelude::*;

    fn interior(r: &[usize]) -> Route {
        Route::from_interior(r).unwrap()
    }

    #[test]
    fn ox_hand_example() {
        let child = order_crossover(&interior(&[1, 2, 3, 4, 5]), &interior(&[5, 4, 3, 2, 1]), (2, 4)).unwrap();
        assert_eq!(child.interior_indices(), vec![5, 2, 3, 4, 1]);
    }

    #[test]
    fn ox_identity() {
        let p = interior(&[3, 1, 4, 2, 5]);
        for cut in [(1, 5), (2, 3), (4, 5)] {
            assert_eq!(order_crossover(&p, &p, cut).unwrap(), p);
        }
    }

    #[test]
    fn ox_rejects_bad_inputs() {
        let a = interior(&[1, 2, 3]);
        assert!(order_crossover(&a, &interior(&[1, 2]), (1, 2)).is_err());
        assert!(order_crossover(&a, &a, (2, 2)).is_err());
        assert!(order_crossover(&a, &a, (0, 2)).is_err());
        assert!(order_crossover(&a, &a, (2, 4)).is_err());
    }

    proptest! {
        #[test]
        fn ox_child_is_always_valid(n in 2usize..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = crate::scenario::generate_scenario(n, 100.0, seed, &Default::default()).unwrap();
            let p1 = random_route(n, &mut rng);
            let p2 = random_route(n, &mut rng);
            let (i, j) = random_cut(n, &mut rng);
            let child = order_crossover(&p1, &p2, (i, j)).unwrap();
            prop_assert!(verify(&s, &CandidateIndividual::from_route(&child), 1e-6).is_ok());
            prop_assert_eq!(&child.interior()[i - 1..j], &p1.interior()[i - 1..j]);
        }
    }

    #[test]
    fn triangle_reaches_optimum() {
        let config = GeneticConfig {
            population_size: 10,
            generations: 10,
            ..Default::default()
        };
        let run = solve_genetic(&triangle(), &config).unwrap();
        assert_eq!(run.best.omega, 9.0);
    }

    #[test]
    fn deterministic_and_elitist() {
        let s = crate::scenario::generate_scenario(12, 3000.0, 2, &Default::default()).unwrap();
        let config = GeneticConfig {
            generations: 60,
            seed: 17,
            ..Default::default()
        };
        let a = solve_genetic(&s, &config).unwrap();
        let b = solve_genetic(&s, &config).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.history, b.history);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.evaluations, 50 + 60 * 49);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.history.last() <= a.history.first());
    }

    #[test]
    fn config_validation() {
        let bad = GeneticConfig {
            crossover_rate: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GeneticConfig {
            population_size: 0,
            ..Default::default()
        };
        assert!(solve_genetic(&triangle(), &bad).is_err());
    }

    #[test]
    fn single_node_runs() {
        let s = crate::fixtures::with_taus(&[(1.0, 0.0)], &[1.0]);
        let run = solve_genetic(&s, &GeneticConfig { generations: 3, ..Default::default() }).unwrap();
        assert_eq!(run.best.route.to_indices(), vec![0, 1, 0]);
    }
}
