//! Language-model plumbing: prompt construction, the chat-completions wire
//! protocol, response parsing and offline mock generators.

mod client;
mod generator;
pub mod mock;
mod parse;
mod prompt;

pub use client::{
    chat_complete, parse_completion, ChatBackend, ChatClient, ChatError, ChatExchange, ChatMessage, LlmEndpointConfig,
    Role, TokenCounts,
};
pub use generator::LlmGenerator;
pub use parse::{parse_route_response, parse_route_responses};
pub use prompt::{build_evolution_prompt, build_init_prompt, build_retry_prompt, PromptDocument, SectionLabel};
