use serde::{Deserialize, Serialize};

use dsp_core::SamplingParams;

use crate::GatewayError;

fn default_timeout() -> u64 {
    600
}

fn default_retries() -> u32 {
    3
}

/// One chat-completion endpoint, OpenAI-compatible. The API key is never
/// stored in config files, only the name of the environment variable that
/// holds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoint {
    pub model_id: String,
    pub base_url: String,
    /// Name of the env var holding the API key; empty means unauthenticated.
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default)]
    pub sampling_defaults: SamplingParams,
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

impl ModelEndpoint {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.model_id.is_empty() {
            return Err(GatewayError::InvalidRequest("empty model_id".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(GatewayError::InvalidRequest(format!(
                "malformed base_url `{}`",
                self.base_url
            )));
        }
        Ok(())
    }

    /// Resolve the API key from the environment, if one is configured.
    pub fn api_key(&self) -> Result<Option<String>, GatewayError> {
        if self.api_key_env.is_empty() {
            return Ok(None);
        }
        std::env::var(&self.api_key_env).map(Some).map_err(|_| {
            GatewayError::EndpointUnavailable(format!(
                "API key env var `{}` is not set",
                self.api_key_env
            ))
        })
    }
}
