//! Age-of-information aware UAV routing.
//!
//! A UAV leaves a data center, collects data from every ground sensor node
//! once and returns. The largest age of information equals the age of the
//! first node visited, which reduces the routing problem to minimizing
//! flight time from the first node onwards. This crate provides the
//! physical model, exact and baseline solvers, an evolutionary engine that
//! uses a language model (or a mock) as its crossover operator, and a
//! seeded experiment harness.

pub mod bench;
pub mod engine;
mod error;
pub mod evo;
pub mod fixtures;
pub mod llm;
pub mod model;
pub mod scenario;
pub mod solvers;

pub use error::{Error, Result};
pub use evo::{CandidateIndividual, Individual, Population, VerificationError, VerificationKind};
pub use model::{evaluate_route, route_objective, AoiProfile, Route};
pub use scenario::{generate_scenario, NodeId, Point, RadioParams, Scenario, ScenarioDefaults, SensorNode};
