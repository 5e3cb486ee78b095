use rand::seq::SliceRandom;
use rand::Rng;

use crate::evo::Individual;
use crate::model::Route;
use crate::scenario::Scenario;

/// Uniform random permutation of `1..=n` wrapped with the depot.
pub fn random_route<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Route {
    let mut interior: Vec<usize> = (1..=n).collect();
    interior.shuffle(rng);
    Route::from_interior(&interior).expect("shuffled range is a permutation")
}

pub fn solve_random<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Individual {
    Individual::evaluate(scenario, random_route(scenario.n(), rng)).expect("route matches scenario")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{triangle, with_taus};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn reproducible() {
        let s = triangle();
        let a = solve_random(&s, &mut ChaCha8Rng::seed_from_u64(3));
        let b = solve_random(&s, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn single_node() {
        let s = with_taus(&[(1.0, 1.0)], &[1.0]);
        let r = solve_random(&s, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(r.route.to_indices(), vec![0, 1, 0]);
    }

    #[test]
    fn permutations_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts.entry(random_route(3, &mut rng).interior_indices()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (perm, c) in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 6.0).abs() <= 0.02, "{perm:?} {f}");
        }
    }
}
