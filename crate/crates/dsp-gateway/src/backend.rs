use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use dsp_core::SamplingParams;

use crate::{
    ChatMessage, GatewayError, HttpBackend, ModelEndpoint, ReplayBackend, TranscriptStore,
};

/// One completion out of a model call.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub content: String,
    /// Completion tokens for this choice (endpoint-reported or estimated).
    pub tokens: u64,
    /// Summed token log-probability, when available. Absent for endpoints
    /// that do not report logprobs.
    pub logprob: Option<f64>,
}

/// A chat-completion strategy. Implementations must be safe to call from
/// many threads with requests in flight concurrently.
pub trait ModelBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Returns `sampling.n` completions for the request, with token counts.
    fn complete(
        &self,
        endpoint: &ModelEndpoint,
        messages: &[ChatMessage],
        sampling: &SamplingParams,
    ) -> Result<Vec<Completion>, GatewayError>;
}

/// Construction-time settings shared by all backends.
#[derive(Debug, Clone, Default)]
pub struct BackendConfig {
    /// Transcript store path. Required for `replay`; optional for `live`
    /// (when set, live responses are recorded for later replay).
    pub transcript_store: Option<PathBuf>,
}

type Factory = Box<dyn Fn(&BackendConfig) -> Result<Arc<dyn ModelBackend>, GatewayError> + Send + Sync>;

/// Model backends registered by name and selected at runtime from config or
/// the CLI `--mode` flag.
pub struct BackendRegistry {
    factories: BTreeMap<String, Factory>,
}

impl BackendRegistry {
    /// Registry with the two built-in strategies: `live` and `replay`.
    pub fn with_defaults() -> Self {
        let mut registry = BackendRegistry {
            factories: BTreeMap::new(),
        };
        registry.register("live", |config| {
            let store = match &config.transcript_store {
                Some(path) => Some(Arc::new(TranscriptStore::open(path)?)),
                None => None,
            };
            Ok(Arc::new(HttpBackend::new(store)) as Arc<dyn ModelBackend>)
        });
        registry.register("replay", |config| {
            let path = config.transcript_store.as_ref().ok_or_else(|| {
                GatewayError::InvalidRequest("replay mode requires a transcript store path".into())
            })?;
            let store = Arc::new(TranscriptStore::open(path)?);
            Ok(Arc::new(ReplayBackend::new(store)) as Arc<dyn ModelBackend>)
        });
        registry
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&BackendConfig) -> Result<Arc<dyn ModelBackend>, GatewayError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(
        &self,
        name: &str,
        config: &BackendConfig,
    ) -> Result<Arc<dyn ModelBackend>, GatewayError> {
        match self.factories.get(name) {
            Some(factory) => factory(config),
            None => Err(GatewayError::UnknownBackend(name.to_string())),
        }
    }
}
