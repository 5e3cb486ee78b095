use crate::engine::{GenerateError, Generator};
use crate::evo::{CandidateIndividual, Individual, VerificationError};
use crate::scenario::Scenario;

use super::client::{ChatBackend, ChatMessage};
use super::parse::{parse_route_response, parse_route_responses};
use super::prompt::{build_evolution_prompt, build_init_prompt, build_retry_prompt, PromptDocument};

const SYSTEM_PROMPT: &str = "You are an expert in combinatorial optimization helping plan UAV data collection routes. \
Answer with routes in exactly the requested bracketed format.";

/// Generator backed by a chat model. Remembers the last evolution prompt so a
/// rejected offspring can be retried with the error appended.
pub struct LlmGenerator<B> {
    backend: B,
    last_prompt: Option<PromptDocument>,
    latency_s: f64,
    exchanges: usize,
}

impl<B: ChatBackend> LlmGenerator<B> {
    pub fn new(backend: B) -> Self {
        LlmGenerator {
            backend,
            last_prompt: None,
            latency_s: 0.0,
            exchanges: 0,
        }
    }

    pub fn exchanges(&self) -> usize {
        self.exchanges
    }

    fn ask(&mut self, prompt: &PromptDocument) -> Result<String, GenerateError> {
        let messages = [ChatMessage::system(SYSTEM_PROMPT), ChatMessage::user(prompt.rendered())];
        self.exchanges += 1;
        match self.backend.complete(&messages) {
            Ok(exchange) => {
                self.latency_s += exchange.latency_s;
                Ok(exchange.response_text)
            }
            Err(e) => Err(GenerateError::Transport(e.to_string())),
        }
    }
}

impl<B: ChatBackend> Generator for LlmGenerator<B> {
    fn propose_initial(&mut self, scenario: &Scenario, count: usize) -> Result<Vec<CandidateIndividual>, GenerateError> {
        let prompt = build_init_prompt(scenario, count);
        let text = self.ask(&prompt)?;
        parse_route_responses(&text, scenario.n()).map_err(GenerateError::Invalid)
    }

    fn propose_offspring(
        &mut self,
        scenario: &Scenario,
        parents: &[Individual],
        feedback: Option<&VerificationError>,
    ) -> Result<CandidateIndividual, GenerateError> {
        let prompt = match (feedback, &self.last_prompt) {
            (Some(err), Some(prev)) => build_retry_prompt(prev, err),
            _ => build_evolution_prompt(scenario, parents).map_err(|e| GenerateError::Transport(e.to_string()))?,
        };
        let text = self.ask(&prompt);
        self.last_prompt = Some(prompt);
        parse_route_response(&text?, scenario.n()).map_err(GenerateError::Invalid)
    }

    fn take_latency(&mut self) -> f64 {
        std::mem::take(&mut self.latency_s)
    }
}
