//! Decision protocol: the prompt templates (state + odometry + history,
//! optional top-down minimap), the sliding action-state history window,
//! model endpoint queries, JSON decision parsing, and the scripted
//! baseline policies.

mod client;
mod decision;
mod history;
mod policy;
mod prompt;

pub use client::{ModelClient, ModelEndpointConfig};
pub use decision::{parse_decision, AgentDecision, ParseStatus};
pub use history::{format_history_entry, HistoryEntry, HistoryWindow};
pub use policy::{
    GreedyPolicy, ModelPolicy, Observation, OraclePolicy, Policy, PolicyDecision, PolicyError,
};
pub use prompt::{build_prompt, build_prompt_text, PromptBundle, PromptVariant};

use thiserror::Error;

/// Client-side failures when talking to a model endpoint.
#[derive(Debug, Error)]
pub enum ClientError {
    #[error("API key environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("endpoint rejected authentication (status {0})")]
    Auth(u16),
    #[error("endpoint returned status {status}: {body}")]
    Endpoint { status: u16, body: String },
    #[error("malformed endpoint response: {0}")]
    MalformedResponse(String),
    #[error("request failed after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("transport error: {0}")]
    Transport(String),
}
