//! Run configuration file: endpoints, budgets, plan stages, parallelism,
//! and paths. Flags override config values, which override defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use dsp_gateway::{BackendConfig, BackendRegistry, ModelEndpoint, ThinkingMarkers};
use dsp_orchestrator::{EnsemblePlan, PipelineConfig, RunContext};
use dsp_phases::RepairOptions;
use dsp_search::{default_symbolic_tactics, SearchBudget};
use dsp_verifier::{ReplConfig, VerifierConfig, VerifierRegistry};

fn default_mode() -> String {
    "replay".into()
}

fn default_verifier() -> String {
    "mock".into()
}

fn default_deadline() -> u64 {
    2400
}

fn default_parallelism() -> usize {
    8
}

fn default_queue_capacity() -> usize {
    32
}

fn default_workers() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    /// Model backend: `live` or `replay`.
    pub mode: String,
    /// Verifier backend: `repl` or `mock`.
    pub verifier: String,
    pub out_dir: Option<PathBuf>,
    /// Wall-clock budget per workflow attempt, seconds.
    pub deadline_secs: u64,
    /// Attempt fan-out used by the serial pass@k API.
    pub attempt_parallelism: usize,
    pub queue_capacity: usize,
    pub draft_workers: usize,
    pub sketch_workers: usize,
    pub prove_workers: usize,
    /// Thinking-marker overrides per model id.
    pub thinking_markers: Option<ThinkingMarkers>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            mode: default_mode(),
            verifier: default_verifier(),
            out_dir: None,
            deadline_secs: default_deadline(),
            attempt_parallelism: default_parallelism(),
            queue_capacity: default_queue_capacity(),
            draft_workers: default_workers(),
            sketch_workers: default_workers(),
            prove_workers: default_workers(),
            thinking_markers: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplaySection {
    pub transcript_store: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MockVerifierSection {
    pub fixture: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairSection {
    pub iteration_cap: Option<u32>,
    pub verify_timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanSection {
    pub name: String,
    #[serde(default = "default_stop")]
    pub stop_on_success: bool,
    pub stages: Vec<dsp_orchestrator::PlanStage>,
}

fn default_stop() -> bool {
    true
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub run: RunSection,
    pub replay: ReplaySection,
    pub verifier_mock: MockVerifierSection,
    pub verifier_repl: Option<ReplConfig>,
    pub repair: RepairSection,
    pub search: Option<SearchBudget>,
    pub symbolic_tactics: Option<Vec<String>>,
    pub endpoints: Vec<ModelEndpoint>,
    pub plans: Vec<PlanSection>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(config)
    }

    pub fn plan(&self, name: Option<&str>) -> anyhow::Result<EnsemblePlan> {
        let section = match name {
            Some(name) => self
                .plans
                .iter()
                .find(|p| p.name == name)
                .with_context(|| format!("no plan named `{name}` in config"))?,
            None => self.plans.first().context("config declares no plans")?,
        };
        let plan = EnsemblePlan {
            stages: section.stages.clone(),
            stop_on_success: section.stop_on_success,
        };
        Ok(plan)
    }

    /// Resolve paths relative to the config file's directory.
    pub fn anchor_paths(&mut self, config_path: &Path) {
        let base = config_path.parent().unwrap_or(Path::new("."));
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        if let Some(p) = self.replay.transcript_store.as_mut() {
            anchor(p);
        }
        if let Some(p) = self.verifier_mock.fixture.as_mut() {
            anchor(p);
        }
        if let Some(p) = self.run.out_dir.as_mut() {
            anchor(p);
        }
    }

    /// Build the shared run context: backend and verifier from their
    /// registries, endpoint table, budgets.
    pub fn build_context(&self, mode_override: Option<&str>) -> anyhow::Result<RunContext> {
        let mode = mode_override.unwrap_or(&self.run.mode);
        if mode == "replay" && self.replay.transcript_store.is_none() {
            bail!("replay mode requires [replay].transcript_store in the config");
        }
        let backend = BackendRegistry::with_defaults()
            .create(
                mode,
                &BackendConfig {
                    transcript_store: self.replay.transcript_store.clone(),
                },
            )
            .map_err(|e| anyhow::anyhow!("model backend `{mode}`: {e}"))?;

        let verifier = VerifierRegistry::with_defaults()
            .create(
                &self.run.verifier,
                &VerifierConfig {
                    mock_fixture: self.verifier_mock.fixture.clone(),
                    repl: self.verifier_repl.clone(),
                },
            )
            .map_err(|e| anyhow::anyhow!("verifier backend `{}`: {e}", self.run.verifier))?;

        let mut endpoints = BTreeMap::new();
        for endpoint in &self.endpoints {
            endpoints.insert(endpoint.model_id.clone(), endpoint.clone());
        }

        let mut repair = RepairOptions::default();
        if let Some(cap) = self.repair.iteration_cap {
            repair.iteration_cap = cap;
        }
        if let Some(secs) = self.repair.verify_timeout_secs {
            repair.verify_timeout = Duration::from_secs(secs);
        }
        let verify_timeout = repair.verify_timeout;

        Ok(RunContext {
            backend: Arc::from(backend),
            endpoints,
            verifier: Arc::from(verifier),
            budget: self.search.clone().unwrap_or_default(),
            symbolic_tactics: self
                .symbolic_tactics
                .clone()
                .unwrap_or_else(default_symbolic_tactics),
            thinking_markers: self.run.thinking_markers.clone().unwrap_or_default(),
            repair,
            verify_timeout,
        })
    }

    pub fn pipeline_config(&self, deadline_override: Option<u64>, stop_on_success: bool) -> PipelineConfig {
        PipelineConfig {
            queue_capacity: self.run.queue_capacity,
            draft_workers: self.run.draft_workers,
            sketch_workers: self.run.sketch_workers,
            prove_workers: self.run.prove_workers,
            attempt_budget: Duration::from_secs(
                deadline_override.unwrap_or(self.run.deadline_secs),
            ),
            stop_on_success,
            record_events: false,
        }
    }
}
