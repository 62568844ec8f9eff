use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::{MockVerifier, ReplConfig, ReplVerifier, Verifier, VerifierError};

/// Construction-time settings shared by all verifier strategies.
#[derive(Debug, Clone, Default)]
pub struct VerifierConfig {
    /// Fixture file for the mock backend.
    pub mock_fixture: Option<PathBuf>,
    /// Subprocess settings for the repl backend.
    pub repl: Option<ReplConfig>,
}

type Factory =
    Box<dyn Fn(&VerifierConfig) -> Result<Arc<dyn Verifier>, VerifierError> + Send + Sync>;

/// Verifier strategies registered by name and selected at runtime from
/// config or the CLI.
pub struct VerifierRegistry {
    factories: BTreeMap<String, Factory>,
}

impl VerifierRegistry {
    /// Registry with the two built-in strategies: `repl` and `mock`.
    pub fn with_defaults() -> Self {
        let mut registry = VerifierRegistry {
            factories: BTreeMap::new(),
        };
        registry.register("mock", |config| {
            let path = config.mock_fixture.as_ref().ok_or_else(|| {
                VerifierError::Fixture("mock verifier requires a fixture path".into())
            })?;
            Ok(Arc::new(MockVerifier::from_path(path)?) as Arc<dyn Verifier>)
        });
        registry.register("repl", |config| {
            let repl = config.repl.clone().ok_or_else(|| {
                VerifierError::Unavailable("repl verifier requires a command".into())
            })?;
            Ok(Arc::new(ReplVerifier::new(repl)) as Arc<dyn Verifier>)
        });
        registry
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&VerifierConfig) -> Result<Arc<dyn Verifier>, VerifierError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(
        &self,
        name: &str,
        config: &VerifierConfig,
    ) -> Result<Arc<dyn Verifier>, VerifierError> {
        match self.factories.get(name) {
            Some(factory) => factory(config),
            None => Err(VerifierError::Unavailable(format!(
                "unknown verifier backend `{name}`"
            ))),
        }
    }
}
