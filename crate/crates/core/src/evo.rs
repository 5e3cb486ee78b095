//! Population machinery shared by the LLM-assisted engine and the genetic
//! baseline: candidate verification, fitness, parent selection and elitist
//! truncation.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate_route, Route};
use crate::scenario::Scenario;

pub const DEFAULT_OMEGA_TOLERANCE: f64 = 1e-6;

/// An unvalidated route proposal, possibly with a self-reported max AoI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateIndividual {
    pub route_claim: Vec<usize>,
    pub omega_claim: Option<f64>,
}

impl CandidateIndividual {
    pub fn new(route_claim: Vec<usize>, omega_claim: Option<f64>) -> Self {
        CandidateIndividual { route_claim, omega_claim }
    }

    pub fn from_route(route: &Route) -> Self {
        CandidateIndividual::new(route.to_indices(), None)
    }
}

/// A verified route with its locally recomputed max AoI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub route: Route,
    pub omega: f64,
}

impl Individual {
    pub fn evaluate(scenario: &Scenario, route: Route) -> Result<Self> {
        let omega = evaluate_route(scenario, &route)?.max_aoi;
        Ok(Individual { route, omega })
    }

    pub fn fitness(&self) -> f64 {
        fitness(self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerificationKind {
    BadEndpoints,
    MissingNode,
    DuplicateNode,
    WrongLength,
    ObjectiveMismatch,
    Unparseable,
}

impl fmt::Display for VerificationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerificationKind::BadEndpoints => "BadEndpoints",
            VerificationKind::MissingNode => "MissingNode",
            VerificationKind::DuplicateNode => "DuplicateNode",
            VerificationKind::WrongLength => "WrongLength",
            VerificationKind::ObjectiveMismatch => "ObjectiveMismatch",
            VerificationKind::Unparseable => "Unparseable",
        };
        f.write_str(s)
    }
}

/// Why a candidate was rejected. `detail` is shown to the model verbatim on
/// retry, so its wording is part of the prompt contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct VerificationError {
    pub kind: VerificationKind,
    pub detail: String,
}

impl VerificationError {
    pub fn new(kind: VerificationKind, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        debug_assert!(!detail.is_empty());
        VerificationError { kind, detail }
    }
}

/// Checks a candidate in order: depot endpoints, each sensor node exactly
/// once, then (when claimed) the max AoI within `omega_tolerance` relative.
/// The returned individual always carries the recomputed value.
pub fn verify(
    scenario: &Scenario,
    candidate: &CandidateIndividual,
    omega_tolerance: f64,
) -> Result<Individual, VerificationError> {
    let route = Route::new(&candidate.route_claim, scenario.n())?;
    let omega = evaluate_route(scenario, &route)
        .map_err(|e| VerificationError::new(VerificationKind::WrongLength, e.to_string()))?
        .max_aoi;
    if let Some(claim) = candidate.omega_claim {
        let scale = omega.abs().max(f64::MIN_POSITIVE);
        if !claim.is_finite() || (claim - omega).abs() > omega_tolerance * scale {
            return Err(VerificationError::new(
                VerificationKind::ObjectiveMismatch,
                format!("claimed maximum AoI {claim:.6} does not match the recomputed value {omega:.6}"),
            ));
        }
    }
    Ok(Individual { route, omega })
}

/// Structural checks only; any claimed AoI is ignored and recomputed.
pub fn verify_structure(scenario: &Scenario, candidate: &CandidateIndividual) -> Result<Individual, VerificationError> {
    let stripped = CandidateIndividual::new(candidate.route_claim.clone(), None);
    verify(scenario, &stripped, DEFAULT_OMEGA_TOLERANCE)
}

/// `exp(-omega)`. Underflows to 0 for large omega, so ranking elsewhere
/// compares omega directly.
pub fn fitness(omega: f64) -> f64 {
    (-omega).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Member {
    individual: Individual,
    admitted: u64,
}

/// Fixed-capacity elitist population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    capacity: usize,
    members: Vec<Member>,
    next_admission: u64,
}

impl Population {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::param("population capacity must be at least 1"));
        }
        Ok(Population {
            capacity,
            members: Vec::with_capacity(capacity + 1),
            next_admission: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    pub fn members(&self) -> impl Iterator<Item = &Individual> {
        self.members.iter().map(|m| &m.individual)
    }

    pub fn to_vec(&self) -> Vec<Individual> {
        self.members().cloned().collect()
    }

    /// Adds a member while filling up; truncates once at capacity.
    pub fn insert(&mut self, individual: Individual) {
        if self.is_full() {
            self.admit_and_truncate(individual);
        } else {
            self.push(individual);
        }
    }

    fn push(&mut self, individual: Individual) {
        self.members.push(Member {
            individual,
            admitted: self.next_admission,
        });
        self.next_admission += 1;
    }

    /// Adds `newcomer` then drops one member with the largest omega. Among
    /// tied worst members the latest admitted goes, so a newcomer tying the
    /// worst incumbent is itself removed. Returns whether the newcomer stayed.
    pub fn admit_and_truncate(&mut self, newcomer: Individual) -> bool {
        self.push(newcomer);
        let worst = self
            .members
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.individual
                    .omega
                    .total_cmp(&b.individual.omega)
                    .then(a.admitted.cmp(&b.admitted))
            })
            .map(|(i, _)| i)
            .expect("population is non-empty after push");
        let kept = worst != self.members.len() - 1;
        self.members.remove(worst);
        kept
    }

    /// Member with the smallest omega, earliest admission on ties.
    pub fn best(&self) -> Result<&Individual> {
        self.members
            .iter()
            .min_by(|a, b| {
                a.individual
                    .omega
                    .total_cmp(&b.individual.omega)
                    .then(a.admitted.cmp(&b.admitted))
            })
            .map(|m| &m.individual)
            .ok_or_else(|| Error::State("population is empty".into()))
    }
}

/// Picks `count` distinct members uniformly at random.
pub fn select_parents<R: Rng + ?Sized>(population: &Population, count: usize, rng: &mut R) -> Result<Vec<Individual>> {
    if count == 0 || count > population.len() {
        return Err(Error::param(format!(
            "parent count must be in 1..={}, got {count}",
            population.len()
        )));
    }
    Ok(rand::seq::index::sample(rng, population.len(), count)
        .into_iter()
        .map(|i| population.members[i].individual.clone())
        .collect())
}
