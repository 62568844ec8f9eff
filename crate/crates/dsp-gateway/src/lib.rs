//! Uniform client layer over chat-completion endpoints.
//!
//! Backends implement [`ModelBackend`] and are registered by name in a
//! [`BackendRegistry`]: `live` talks the OpenAI-compatible HTTP protocol with
//! retry/backoff, `replay` serves recorded transcripts content-addressed by
//! request fingerprint, which makes every downstream phase deterministic
//! offline. Prompt templates and the thinking-token filter also live here.

mod backend;
mod endpoint;
mod error;
mod fingerprint;
mod http;
mod prompts;
mod replay;
mod thinking;
mod transcript;
mod wire;

pub use backend::{BackendConfig, BackendRegistry, Completion, ModelBackend};
pub use endpoint::ModelEndpoint;
pub use error::GatewayError;
pub use fingerprint::{request_fingerprint, ChatMessage};
pub use http::{HttpBackend, Transport};
pub use prompts::{render_draft_prompt, render_sketch_prompt};
pub use replay::ReplayBackend;
pub use thinking::{approx_tokens, strip_thinking, strip_thinking_with, ThinkingMarkers};
pub use transcript::{TranscriptRecord, TranscriptStore};
pub use wire::{ChatChoice, ChatRequest, ChatResponse, ChatUsage, ChoiceMessage};
