//! Deterministic stand-ins for a language model, for offline runs and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{GenerateError, Generator};
use crate::error::Result;
use crate::evo::{CandidateIndividual, Individual, VerificationError};
use crate::model::Route;
use crate::scenario::Scenario;
use crate::solvers::{order_crossover, random_cut, random_route, solve_exact};

/// Always answers with the exact optimum.
#[derive(Debug, Clone)]
pub struct PerfectGenerator {
    route: Route,
}

impl PerfectGenerator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Ok(PerfectGenerator {
            route: solve_exact(scenario)?.route,
        })
    }
}

impl Generator for PerfectGenerator {
    fn propose_initial(&mut self, _: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError> {
        Ok(vec![CandidateIndividual::from_route(&self.route); count])
    }

    fn propose_offspring(
        &mut self,
        _: &Scenario,
        _: &[Individual],
        _: Option<&VerificationError>,
    ) -> Result<CandidateIndividual, GenerateError> {
        Ok(CandidateIndividual::from_route(&self.route))
    }
}

/// Random initial routes; offspring are the order crossover of two parents
/// drawn at random.
#[derive(Debug, Clone)]
pub struct OxGenerator {
    rng: ChaCha8Rng,
}

impl OxGenerator {
    pub fn new(seed: u64) -> Self {
        OxGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Generator for OxGenerator {
    fn propose_initial(&mut self, scenario: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError> {
        Ok((0..count)
            .map(|_| CandidateIndividual::from_route(&random_route(scenario.n(), &mut self.rng)))
            .collect())
    }

    fn propose_offspring(
        &mut self,
        scenario: &Scenario,
        parents: &[Individual],
        _: Option<&VerificationError>,
    ) -> Result<CandidateIndividual, GenerateError> {
        let n = scenario.n();
        let route = match parents.len() {
            0 => random_route(n, &mut self.rng),
            len => {
                let a = self.rng.random_range(0..len);
                let mut b = self.rng.random_range(0..len);
                if len > 1 {
                    while b == a {
                        b = self.rng.random_range(0..len);
                    }
                }
                if n >= 2 {
                    let cut = random_cut(n, &mut self.rng);
                    order_crossover(&parents[a].route, &parents[b].route, cut)
                        .map_err(|e| GenerateError::Transport(e.to_string()))?
                } else {
                    parents[a].route.clone()
                }
            }
        };
        Ok(CandidateIndividual::from_route(&route))
    }
}

/// Wraps another generator and, with probability `rate` per candidate,
/// overwrites one interior node with a copy of another so the route visits
/// a node twice. Single-node routes get the node appended again instead.
#[derive(Debug, Clone)]
pub struct FaultyGenerator<G> {
    inner: G,
    rate: f64,
    rng: ChaCha8Rng,
}

impl<G: Generator> FaultyGenerator<G> {
    pub fn new(inner: G, rate: f64, seed: u64) -> Self {
        FaultyGenerator {
            inner,
            rate: rate.clamp(0.0, 1.0),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn maybe_corrupt(&mut self, mut c: CandidateIndividual) -> CandidateIndividual {
        if !self.rng.random_bool(self.rate) {
            return c;
        }
        let seq = &mut c.route_claim;
        let interior = seq.len().saturating_sub(2);
        if interior >= 2 {
            let (i, j) = random_cut(interior, &mut self.rng);
            let (src, dst) = if self.rng.random_bool(0.5) { (i, j) } else { (j, i) };
            seq[dst] = seq[src];
        } else if interior == 1 {
            seq.insert(1, seq[1]);
        }
        c
    }
}

impl<G: Generator> Generator for FaultyGenerator<G> {
    fn propose_initial(&mut self, scenario: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError> {
        let cands = self.inner.propose_initial(scenario, count)?;
        Ok(cands.into_iter().map(|c| self.maybe_corrupt(c)).collect())
    }

    fn propose_offspring(
        &mut self,
        scenario: &Scenario,
        parents: &[Individual],
        feedback: Option<&VerificationError>,
    ) -> Result<CandidateIndividual, GenerateError> {
        let c = self.inner.propose_offspring(scenario, parents, feedback)?;
        Ok(self.maybe_corrupt(c))
    }

    fn take_latency(&mut self) -> f64 {
        self.inner.take_latency()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evo::{verify, VerificationKind};
    use crate::fixtures::{triangle, with_taus};

    #[test]
    fn perfect_returns_the_optimum() {
        let s = triangle();
        let mut g = PerfectGenerator::new(&s).unwrap();
        let c = g.propose_offspring(&s, &[], None).unwrap();
        assert_eq!(c.route_claim, vec![0, 2, 1, 0]);
        assert_eq!(g.propose_initial(&s, 3).unwrap().len(), 3);
    }

    #[test]
    fn ox_offspring_are_valid() {
        let s = crate::scenario::generate_scenario(9, 3000.0, 1, &Default::default()).unwrap();
        let mut g = OxGenerator::new(3);
        let parents: Vec<Individual> = g
            .propose_initial(&s, 5)
            .unwrap()
            .iter()
            .map(|c| verify(&s, c, 1e-6).unwrap())
            .collect();
        for _ in 0..50 {
            let c = g.propose_offspring(&s, &parents, None).unwrap();
            assert!(verify(&s, &c, 1e-6).is_ok());
        }
        assert!(verify(&s, &g.propose_offspring(&s, &[], None).unwrap(), 1e-6).is_ok());
    }

    #[test]
    fn faulty_output_is_always_rejected() {
        let s = crate::scenario::generate_scenario(7, 3000.0, 1, &Default::default()).unwrap();
        let mut g = FaultyGenerator::new(OxGenerator::new(1), 1.0, 2);
        for c in g.propose_initial(&s, 50).unwrap() {
            assert_eq!(verify(&s, &c, 1e-6).unwrap_err().kind, VerificationKind::DuplicateNode);
        }
        let single = with_taus(&[(1.0, 1.0)], &[1.0]);
        let c = g.propose_initial(&single, 1).unwrap().remove(0);
        assert!(verify(&single, &c, 1e-6).is_err());
    }

    #[test]
    fn zero_rate_is_transparent() {
        let s = triangle();
        let mut plain = OxGenerator::new(9);
        let mut wrapped = FaultyGenerator::new(OxGenerator::new(9), 0.0, 1);
        assert_eq!(plain.propose_initial(&s, 4).unwrap(), wrapped.propose_initial(&s, 4).unwrap());
    }
}
