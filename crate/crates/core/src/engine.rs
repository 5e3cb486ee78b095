//! LLM-assisted evolutionary routing loop and the direct-sampling baseline.
//!
//! The engine owns the population and never trusts a generator: every
//! proposal goes through [`verify`] before it can enter the population, and
//! the stored max AoI is always the local recomputation.
//!
//! Loop per iteration: pick parents uniformly, ask the generator for one
//! offspring, verify it, and on rejection ask again with the rejection
//! reason as feedback, up to `max_attempts` times. An accepted offspring is
//! admitted and the worst member dropped.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evo::{
    select_parents, verify, verify_structure, CandidateIndividual, Individual, Population, VerificationError,
    VerificationKind, DEFAULT_OMEGA_TOLERANCE,
};
use crate::scenario::Scenario;
use crate::solvers::random_route;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LauraConfig {
    pub population_size: usize,
    pub parent_count: usize,
    pub iterations: usize,
    pub max_attempts: usize,
    pub omega_tolerance: f64,
    pub seed: u64,
}

impl Default for LauraConfig {
    fn default() -> Self {
        LauraConfig {
            population_size: 10,
            parent_count: 5,
            iterations: 10,
            max_attempts: 3,
            omega_tolerance: DEFAULT_OMEGA_TOLERANCE,
            seed: 0,
        }
    }
}

impl LauraConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::param("population_size must be at least 1"));
        }
        if self.parent_count == 0 || self.parent_count > self.population_size {
            return Err(Error::param(format!(
                "parent_count must be in 1..={}, got {}",
                self.population_size, self.parent_count
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::param("max_attempts must be at least 1"));
        }
        if !(self.omega_tolerance.is_finite() && self.omega_tolerance >= 0.0) {
            return Err(Error::param("omega_tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerateError {
    /// The generator answered but the answer could not be turned into a
    /// candidate. Counts as a hallucination.
    #[error("{0}")]
    Invalid(VerificationError),
    /// No answer was obtained (network, timeout, bad status).
    #[error("generator unavailable: {0}")]
    Transport(String),
}

/// Source of route proposals, typically a language model.
///
/// Implementations may keep conversation state but must not assume more
/// than one engine drives them at a time.
pub trait Generator {
    fn propose_initial(&mut self, scenario: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError>;

    fn propose_offspring(
        &mut self,
        scenario: &Scenario,
        parents: &[Individual],
        feedback: Option<&VerificationError>,
    ) -> Result<CandidateIndividual, GenerateError>;

    /// Seconds spent waiting on the backend since the previous call.
    fn take_latency(&mut self) -> f64 {
        0.0
    }
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn propose_initial(&mut self, scenario: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError> {
        (**self).propose_initial(scenario, count)
    }

    fn propose_offspring(
        &mut self,
        scenario: &Scenario,
        parents: &[Individual],
        feedback: Option<&VerificationError>,
    ) -> Result<CandidateIndividual, GenerateError> {
        (**self).propose_offspring(scenario, parents, feedback)
    }

    fn take_latency(&mut self) -> f64 {
        (**self).take_latency()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "kind", rename_all = "snake_case")]
pub enum AttemptOutcome {
    Accepted,
    Rejected(VerificationKind),
    TransportFailed,
}

impl fmt::Display for AttemptOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttemptOutcome::Accepted => f.write_str("accepted"),
            AttemptOutcome::Rejected(kind) => write!(f, "rejected:{kind}"),
            AttemptOutcome::TransportFailed => f.write_str("transport_failed"),
        }
    }
}

/// One generator proposal. Initialization slots use iteration 0 with
/// `attempt` numbering the slot; evolution iterations start at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptLog {
    pub iteration: usize,
    pub attempt: usize,
    pub outcome: AttemptOutcome,
    pub latency_s: f64,
    /// Best omega in the population once this attempt was processed.
    pub best_omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// `None` only when direct sampling produced no valid route.
    pub best: Option<Individual>,
    pub final_population: Vec<Individual>,
    /// Best omega after initialization, then after every iteration.
    pub best_trace: Vec<f64>,
    pub initialization: Vec<AttemptLog>,
    pub attempts: Vec<AttemptLog>,
    /// Initialization slots filled with a random route after a failure.
    pub backfilled: usize,
    pub hallucination_rate: f64,
}

impl SolverReport {
    pub fn best_omega(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.omega)
    }

    pub fn all_attempts(&self) -> impl Iterator<Item = &AttemptLog> {
        self.initialization.iter().chain(&self.attempts)
    }

    /// Per-attempt trace with columns `iteration,attempt,outcome,best_omega`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "attempt", "outcome", "best_omega"])?;
        for a in self.all_attempts() {
            w.write_record([
                a.iteration.to_string(),
                a.attempt.to_string(),
                a.outcome.to_string(),
                a.best_omega.map(|o| o.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rejected share of proposals that got an answer; transport failures are
/// excluded. An empty log gives 0.
pub fn hallucination_rate<'a>(attempts: impl IntoIterator<Item = &'a AttemptLog>) -> f64 {
    let (mut rejected, mut answered) = (0usize, 0usize);
    for a in attempts {
        match a.outcome {
            AttemptOutcome::Accepted => answered += 1,
            AttemptOutcome::Rejected(_) => {
                answered += 1;
                rejected += 1;
            }
            AttemptOutcome::TransportFailed => {}
        }
    }
    if answered == 0 {
        0.0
    } else {
        rejected as f64 / answered as f64
    }
}

fn initialize<G: Generator + ?Sized, R: Rng>(
    scenario: &Scenario,
    config: &LauraConfig,
    generator: &mut G,
    rng: &mut R,
) -> Result<(Population, Vec<AttemptLog>, usize)> {
    let k = config.population_size;
    let proposals = generator.propose_initial(scenario, k);
    let mut latency = generator.take_latency();
    let mut population = Population::new(k)?;
    let mut log = Vec::with_capacity(k);
    let mut backfilled = 0;

    let slots: Vec<Result<CandidateIndividual, GenerateError>> = match proposals {
        Ok(mut cands) => {
            cands.truncate(k);
            let mut slots: Vec<_> = cands.into_iter().map(Ok).collect();
            while slots.len() < k {
                slots.push(Err(GenerateError::Invalid(VerificationError::new(
                    VerificationKind::Unparseable,
                    format!("expected {k} initial routes, response held fewer"),
                ))));
            }
            slots
        }
        Err(e) => (0..k).map(|_| Err(e.clone())).collect(),
    };

    for (slot, proposal) in slots.into_iter().enumerate() {
        let outcome = match proposal.and_then(|c| verify(scenario, &c, config.omega_tolerance).map_err(GenerateError::Invalid)) {
            Ok(ind) => {
                population.insert(ind);
                AttemptOutcome::Accepted
            }
            Err(e) => {
                backfilled += 1;
                let route = random_route(scenario.n(), rng);
                population.insert(Individual::evaluate(scenario, route)?);
                match e {
                    GenerateError::Invalid(v) => AttemptOutcome::Rejected(v.kind),
                    GenerateError::Transport(_) => AttemptOutcome::TransportFailed,
                }
            }
        };
        log.push(AttemptLog {
            iteration: 0,
            attempt: slot + 1,
            outcome,
            latency_s: std::mem::take(&mut latency),
            best_omega: population.best().ok().map(|b| b.omega),
        });
    }
    Ok((population, log, backfilled))
}

pub fn run_laura<G: Generator + ?Sized>(scenario: &Scenario, config: &LauraConfig, generator: &mut G) -> Result<SolverReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut population, initialization, backfilled) = initialize(scenario, config, generator, &mut rng)?;
    let mut best_trace = Vec::with_capacity(config.iterations + 1);
    best_trace.push(population.best()?.omega);
    let mut attempts = Vec::new();

    for iteration in 1..=config.iterations {
        let parents = select_parents(&population, config.parent_count, &mut rng)?;
        let mut feedback: Option<VerificationError> = None;
        for attempt in 1..=config.max_attempts {
            let proposal = generator.propose_offspring(scenario, &parents, feedback.as_ref());
            let latency_s = generator.take_latency();
            let checked = proposal.and_then(|c| verify(scenario, &c, config.omega_tolerance).map_err(GenerateError::Invalid));
            let (outcome, done) = match checked {
                Ok(ind) => {
                    population.admit_and_truncate(ind);
                    (AttemptOutcome::Accepted, true)
                }
                Err(GenerateError::Invalid(e)) => {
                    log::debug!("iteration {iteration} attempt {attempt} rejected: {e}");
                    let kind = e.kind;
                    feedback = Some(e);
                    (AttemptOutcome::Rejected(kind), false)
                }
                Err(GenerateError::Transport(msg)) => {
                    log::warn!("iteration {iteration} attempt {attempt}: {msg}");
                    (AttemptOutcome::TransportFailed, false)
                }
            };
            attempts.push(AttemptLog {
                iteration,
                attempt,
                outcome,
                latency_s,
                best_omega: Some(population.best()?.omega),
            });
            if done {
                break;
            }
        }
        best_trace.push(population.best()?.omega);
    }

    let hallucination_rate = hallucination_rate(initialization.iter().chain(&attempts));
    Ok(SolverReport {
        best: Some(population.best()?.clone()),
        final_population: population.to_vec(),
        best_trace,
        initialization,
        attempts,
        backfilled,
        hallucination_rate,
    })
}

/// Direct sampling without evolution or feedback. Each sample is an
/// independent single-route request; only the structural checks decide
/// validity and the max AoI is recomputed locally either way.
pub fn run_ledma<G: Generator + ?Sized>(scenario: &Scenario, samples: usize, generator: &mut G) -> Result<SolverReport> {
    if samples == 0 {
        return Err(Error::param("samples must be at least 1"));
    }
    let mut valid = Vec::new();
    let mut best: Option<Individual> = None;
    let mut best_trace = Vec::new();
    let mut attempts = Vec::with_capacity(samples);

    for sample in 1..=samples {
        let proposal = generator.propose_initial(scenario, 1).and_then(|mut cands| {
            if cands.is_empty() {
                Err(GenerateError::Invalid(VerificationError::new(
                    VerificationKind::Unparseable,
                    "response held no route",
                )))
            } else {
                Ok(cands.swap_remove(0))
            }
        });
        let latency_s = generator.take_latency();
        let outcome = match proposal.and_then(|c| verify_structure(scenario, &c).map_err(GenerateError::Invalid)) {
            Ok(ind) => {
                if best.as_ref().is_none_or(|b| ind.omega < b.omega) {
                    best = Some(ind.clone());
                }
                valid.push(ind);
                AttemptOutcome::Accepted
            }
            Err(GenerateError::Invalid(e)) => AttemptOutcome::Rejected(e.kind),
            Err(GenerateError::Transport(_)) => AttemptOutcome::TransportFailed,
        };
        let best_omega = best.as_ref().map(|b| b.omega);
        if let Some(o) = best_omega {
            best_trace.push(o);
        }
        attempts.push(AttemptLog {
            iteration: sample,
            attempt: 1,
            outcome,
            latency_s,
            best_omega,
        });
    }

    if best.is_none() {
        log::warn!("direct sampling produced no valid route in {samples} samples");
    }
    Ok(SolverReport {
        best,
        final_population: valid,
        best_trace,
        initialization: Vec::new(),
        hallucination_rate: hallucination_rate(&attempts),
        attempts,
        backfilled: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::triangle;
    use crate::llm::mock::{FaultyGenerator, OxGenerator, PerfectGenerator};

    fn log(outcome: AttemptOutcome) -> AttemptLog {
        AttemptLog {
            iteration: 1,
            attempt: 1,
            outcome,
            latency_s: 0.0,
            best_omega: None,
        }
    }

    #[test]
    fn hallucination_rate_examples() {
        let mut logs: Vec<AttemptLog> = (0..7).map(|_| log(AttemptOutcome::Accepted)).collect();
        logs.extend((0..3).map(|_| log(AttemptOutcome::Rejected(VerificationKind::DuplicateNode))));
        assert!((hallucination_rate(&logs) - 0.3).abs() < 1e-15);
        assert_eq!(hallucination_rate(&[]), 0.0);
        let all_bad: Vec<_> = (0..4).map(|_| log(AttemptOutcome::Rejected(VerificationKind::BadEndpoints))).collect();
        assert_eq!(hallucination_rate(&all_bad), 1.0);
        let mut with_transport = all_bad.clone();
        with_transport.push(log(AttemptOutcome::TransportFailed));
        assert_eq!(hallucination_rate(&with_transport), 1.0);
    }

    #[test]
    fn config_validation() {
        let s = triangle();
        let mut g = PerfectGenerator::new(&s).unwrap();
        for bad in [
            LauraConfig { parent_count: 0, ..Default::default() },
            LauraConfig { parent_count: 11, ..Default::default() },
            LauraConfig { max_attempts: 0, ..Default::default() },
            LauraConfig { population_size: 0, ..Default::default() },
        ] {
            assert!(run_laura(&s, &bad, &mut g).is_err());
        }
        assert!(run_ledma(&s, 0, &mut g).is_err());
    }

    #[test]
    fn perfect_generator_finds_optimum() {
        let s = triangle();
        let mut g = PerfectGenerator::new(&s).unwrap();
        let config = LauraConfig { iterations: 1, ..Default::default() };
        let report = run_laura(&s, &config, &mut g).unwrap();
        assert_eq!(report.best_omega(), Some(9.0));
        assert_eq!(report.hallucination_rate, 0.0);
        assert_eq!(report.backfilled, 0);
        assert_eq!(report.final_population.len(), 10);
    }

    #[test]
    fn always_faulty_generator_never_admits() {
        let s = crate::scenario::generate_scenario(6, 3000.0, 1, &Default::default()).unwrap();
        let mut g = FaultyGenerator::new(OxGenerator::new(5), 1.0, 6);
        let config = LauraConfig { iterations: 10, max_attempts: 3, ..Default::default() };
        let report = run_laura(&s, &config, &mut g).unwrap();
        assert_eq!(report.attempts.len(), 30);
        assert_eq!(report.hallucination_rate, 1.0);
        assert_eq!(report.backfilled, 10);
        assert!(report.best_trace.iter().all(|&o| o == report.best_trace[0]));
        assert!(report.attempts.iter().all(|a| a.outcome == AttemptOutcome::Rejected(VerificationKind::DuplicateNode)));
    }

    #[test]
    fn retry_feedback_carries_the_error() {
        struct Recorder {
            feedback: Vec<Option<String>>,
        }
        impl Generator for Recorder {
            fn propose_initial(&mut self, s: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError> {
                Ok((0..count)
                    .map(|_| CandidateIndividual::from_route(&crate::solvers::solve_greedy(s).route))
                    .collect())
            }
            fn propose_offspring(
                &mut self,
                _: &Scenario,
                _: &[Individual],
                feedback: Option<&VerificationError>,
            ) -> Result<CandidateIndividual, GenerateError> {
                self.feedback.push(feedback.map(|f| f.detail.clone()));
                Ok(CandidateIndividual::new(vec![0, 1, 1, 0], None))
            }
        }
        let s = triangle();
        let mut g = Recorder { feedback: Vec::new() };
        let config = LauraConfig { population_size: 2, parent_count: 1, iterations: 1, max_attempts: 3, ..Default::default() };
        run_laura(&s, &config, &mut g).unwrap();
        let dup = Some("node 1 is visited more than once".to_string());
        assert_eq!(g.feedback, vec![None, dup.clone(), dup]);
    }

    #[test]
    fn ledma_examples() {
        let s = triangle();
        let mut perfect = PerfectGenerator::new(&s).unwrap();
        let r = run_ledma(&s, 1, &mut perfect).unwrap();
        assert_eq!(r.best_omega(), Some(9.0));

        let mut bad = FaultyGenerator::new(OxGenerator::new(1), 1.0, 2);
        let r = run_ledma(&s, 5, &mut bad).unwrap();
        assert!(r.best.is_none());
        assert_eq!(r.hallucination_rate, 1.0);
        assert!(r.best_trace.is_empty());
    }

    #[test]
    fn trace_csv_has_one_row_per_attempt() {
        let s = triangle();
        let mut g = FaultyGenerator::new(OxGenerator::new(3), 0.5, 4);
        let config = LauraConfig { population_size: 4, parent_count: 2, iterations: 5, ..Default::default() };
        let report = run_laura(&s, &config, &mut g).unwrap();
        let mut buf = Vec::new();
        report.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,attempt,outcome,best_omega"));
        assert_eq!(lines.count(), report.initialization.len() + report.attempts.len());
    }
}
