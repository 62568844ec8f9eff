use std::sync::Arc;
use std::time::Duration;

use dsp_core::SamplingParams;

use crate::backend::{Completion, ModelBackend};
use crate::{
    approx_tokens, request_fingerprint, ChatMessage, ChatRequest, ChatResponse, GatewayError,
    ModelEndpoint, TranscriptRecord, TranscriptStore,
};

/// The HTTP leg of the live backend, separated out so retry and recording
/// logic can be tested without a network.
pub trait Transport: Send + Sync {
    fn send(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &ChatRequest,
        timeout: Duration,
    ) -> Result<ChatResponse, GatewayError>;
}

struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl Transport for ReqwestTransport {
    fn send(
        &self,
        url: &str,
        api_key: Option<&str>,
        body: &ChatRequest,
        timeout: Duration,
    ) -> Result<ChatResponse, GatewayError> {
        let mut request = self.client.post(url).timeout(timeout).json(body);
        if let Some(key) = api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| GatewayError::EndpointUnavailable(e.to_string()))?;
        let status = response.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(GatewayError::EndpointUnavailable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(GatewayError::ProtocolError(format!("HTTP {status}: {body}")));
        }
        response
            .json::<ChatResponse>()
            .map_err(|e| GatewayError::ProtocolError(format!("malformed response body: {e}")))
    }
}

/// Live OpenAI-compatible client with exponential backoff on transient
/// transport failures. When a transcript store is attached, every response
/// is recorded under its request fingerprint for later replay.
pub struct HttpBackend {
    transport: Box<dyn Transport>,
    store: Option<Arc<TranscriptStore>>,
    backoff_base: Duration,
}

impl HttpBackend {
    pub fn new(store: Option<Arc<TranscriptStore>>) -> Self {
        HttpBackend {
            transport: Box::new(ReqwestTransport {
                client: reqwest::blocking::Client::new(),
            }),
            store,
            backoff_base: Duration::from_millis(250),
        }
    }

    /// Build with a custom transport (tests inject failures here).
    pub fn with_transport(
        transport: Box<dyn Transport>,
        store: Option<Arc<TranscriptStore>>,
        backoff_base: Duration,
    ) -> Self {
        HttpBackend {
            transport,
            store,
            backoff_base,
        }
    }

    fn completions_url(endpoint: &ModelEndpoint) -> String {
        let base = endpoint.base_url.trim_end_matches('/');
        format!("{base}/chat/completions")
    }
}

impl ModelBackend for HttpBackend {
    fn name(&self) -> &'static str {
        "live"
    }

    fn complete(
        &self,
        endpoint: &ModelEndpoint,
        messages: &[ChatMessage],
        sampling: &SamplingParams,
    ) -> Result<Vec<Completion>, GatewayError> {
        if messages.is_empty() {
            return Err(GatewayError::InvalidRequest("empty message list".into()));
        }
        endpoint.validate()?;
        let api_key = endpoint.api_key()?;
        let body = ChatRequest {
            model: endpoint.model_id.clone(),
            messages: messages.to_vec(),
            temperature: sampling.temperature,
            top_p: sampling.top_p,
            max_tokens: sampling.max_tokens,
            n: sampling.n,
            seed: sampling.seed,
            logprobs: None,
        };
        let url = Self::completions_url(endpoint);
        let timeout = Duration::from_secs(endpoint.request_timeout_secs);

        let mut last_err = None;
        for attempt in 0..=endpoint.max_retries {
            match self.transport.send(&url, api_key.as_deref(), &body, timeout) {
                Ok(response) => {
                    let completions = completions_from_response(&body, &response, sampling)?;
                    if let Some(store) = &self.store {
                        let record = TranscriptRecord {
                            fingerprint: request_fingerprint(
                                &endpoint.model_id,
                                messages,
                                sampling,
                            ),
                            request: body.clone(),
                            responses: completions.iter().map(|c| c.content.clone()).collect(),
                            token_counts: completions.iter().map(|c| c.tokens).collect(),
                            logprobs: completions
                                .iter()
                                .map(|c| c.logprob)
                                .collect::<Option<Vec<_>>>(),
                        };
                        store.append(record)?;
                    }
                    return Ok(completions);
                }
                // Protocol errors are not transient; do not retry them.
                Err(err @ GatewayError::ProtocolError(_)) => return Err(err),
                Err(err) => {
                    tracing::warn!(attempt, "transport failure: {err}");
                    last_err = Some(err);
                    if attempt < endpoint.max_retries {
                        std::thread::sleep(self.backoff_base * 2u32.pow(attempt));
                    }
                }
            }
        }
        Err(last_err.unwrap_or_else(|| GatewayError::EndpointUnavailable("no attempts made".into())))
    }
}

fn completions_from_response(
    request: &ChatRequest,
    response: &ChatResponse,
    sampling: &SamplingParams,
) -> Result<Vec<Completion>, GatewayError> {
    if response.choices.is_empty() {
        return Err(GatewayError::ProtocolError("response has no choices".into()));
    }
    if response.choices.len() != sampling.n as usize {
        tracing::warn!(
            requested = sampling.n,
            got = response.choices.len(),
            model = %request.model,
            "endpoint returned unexpected completion count"
        );
    }
    // Endpoint usage covers all choices combined; single-choice responses
    // get the exact count, batched ones get a per-choice estimate.
    let exact = if response.choices.len() == 1 {
        Some(response.usage.completion_tokens)
    } else {
        None
    };
    Ok(response
        .choices
        .iter()
        .map(|choice| Completion {
            content: choice.message.content.clone(),
            tokens: exact
                .filter(|&t| t > 0)
                .unwrap_or_else(|| approx_tokens(&choice.message.content)),
            logprob: choice.logprob,
        })
        .collect())
}
