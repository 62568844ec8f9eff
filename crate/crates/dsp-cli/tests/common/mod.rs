//! Shared offline fixture: a 10-statement benchmark with recorded model
//! transcripts and a scripted verifier table, covering every outcome class
//! the workflow can produce. Everything is generated into a temp directory
//! so tests stay self-contained.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use dsp_core::{Draft, DraftFormat, FormalStatement, Outcome, PhaseConfig, SamplingParams};
use dsp_gateway::{
    approx_tokens, render_draft_prompt, render_sketch_prompt, request_fingerprint, strip_thinking,
    ChatMessage, ChatRequest, TranscriptRecord, TranscriptStore,
};
use dsp_phases::parse_draft_steps;
use dsp_verifier::{MockFixture, MockRule, MockState, MockTransition, VerifyDelay};

pub const HEADER: &str = "import Mathlib";
pub const STATEMENT_IDS: [&str; 10] = [
    "p01", "p02", "p03", "p04", "p05", "p06", "p07", "p08", "p09", "p10",
];

pub fn stage_a_config() -> PhaseConfig {
    let mut sampling = BTreeMap::new();
    sampling.insert(
        "qwq".to_string(),
        SamplingParams { temperature: 0.6, top_p: 0.95, max_tokens: 32768, n: 1, seed: None },
    );
    sampling.insert(
        "v3".to_string(),
        SamplingParams { temperature: 0.7, top_p: 1.0, max_tokens: 8192, n: 1, seed: None },
    );
    sampling.insert(
        "bfs".to_string(),
        SamplingParams { temperature: 1.1, top_p: 1.0, max_tokens: 64, n: 8, seed: None },
    );
    PhaseConfig {
        draft_model: Some("qwq".into()),
        sketch_model: "v3".into(),
        prover_model: Some("bfs".into()),
        draft_format: DraftFormat::ConciseSteps,
        use_informal_proof: false,
        sampling,
    }
}

pub fn stage_b_config() -> PhaseConfig {
    let mut sampling = BTreeMap::new();
    sampling.insert(
        "v3".to_string(),
        SamplingParams { temperature: 0.7, top_p: 1.0, max_tokens: 8192, n: 1, seed: None },
    );
    sampling.insert(
        "bfs".to_string(),
        SamplingParams { temperature: 1.1, top_p: 1.0, max_tokens: 64, n: 8, seed: None },
    );
    PhaseConfig {
        draft_model: None,
        sketch_model: "v3".into(),
        prover_model: Some("bfs".into()),
        draft_format: DraftFormat::None,
        use_informal_proof: false,
        sampling,
    }
}

pub fn statement(id: &str) -> FormalStatement {
    let mut stmt = FormalStatement::new(id, HEADER, format!("theorem {id} : P_{id} := by"));
    stmt.source = "fixture".into();
    stmt
}

pub fn statements() -> Vec<FormalStatement> {
    STATEMENT_IDS.iter().map(|id| statement(id)).collect()
}

const DRAFT_OK: &str =
    "<think>short scratch work</think>### Step 1: \n\\[ a = a \\]\n### Step 2: \n\\[ b = b \\]\n";
const DRAFT_EMPTY: &str = "<think>never finished thinking";

fn good_sketch(id: &str) -> String {
    format!(
        "```lean4\ntheorem {id} : P_{id} := by\n  have h1 : G_{id} := by\n    prove_with[]\n  exact h1\n```"
    )
}

fn repairable_sketch(id: &str) -> String {
    format!(
        "```lean4\ntheorem {id} (hA : A_{id}) : P_{id} := by\n  have h1 : G_{id} := by\n    bad_line_{id}\n  have h2 : H_{id} := by\n    prove_with[hA, h1]\n  exact h2\n```"
    )
}

fn two_hole_sketch(id: &str) -> String {
    format!(
        "```lean4\ntheorem {id} : P_{id} := by\n  have a : GA_{id} := by\n    prove_with[]\n  have b : GB_{id} := by\n    prove_with[]\n  exact And.intro a b\n```"
    )
}

fn dead_sketch(id: &str) -> String {
    format!(
        "```lean4\ntheorem {id} : P_{id} := by\n  have h1 : DEAD_{id} := by\n    prove_with[]\n  exact h1\n```"
    )
}

fn broken_sketch(id: &str) -> String {
    format!("```lean4\ntheorem {id} : BROKEN_HEADER := by\n  trivial\n```")
}

fn chain_sketch(id: &str) -> String {
    format!(
        "```lean4\ntheorem {id} : P_{id} := by\n  have h1 : CHAIN_{id} := by\n    prove_with[]\n  exact h1\n```"
    )
}

/// Which sketch each statement's sketch model emits (same text for every
/// attempt seed; the behaviors differ through the verifier table).
fn sketch_for(id: &str, k: u64, stage_a: bool) -> String {
    match id {
        "p02" if stage_a && k == 0 => dead_sketch(id),
        "p03" => repairable_sketch(id),
        "p04" => broken_sketch(id),
        "p06" => good_sketch(id),
        "p07" => two_hole_sketch(id),
        "p08" => dead_sketch(id),
        "p09" if stage_a => broken_sketch(id),
        "p10" if stage_a => chain_sketch(id),
        _ => good_sketch(id),
    }
}

fn draft_for(id: &str) -> &'static str {
    if id == "p05" {
        DRAFT_EMPTY
    } else {
        DRAFT_OK
    }
}

/// Expected outcome per (statement, stage index, attempt index), valid for
/// runs where every scheduled attempt executes.
pub fn expected_outcome(id: &str, stage_idx: usize, k: u64) -> Outcome {
    let stage_a = stage_idx == 0;
    match id {
        "p01" | "p03" | "p10" => Outcome::Proved,
        "p02" if stage_a && k == 0 => Outcome::BudgetExhausted,
        "p02" => Outcome::Proved,
        "p04" => Outcome::SketchFailed,
        "p05" if stage_a => Outcome::DraftFailed,
        "p05" => Outcome::Proved,
        "p06" => Outcome::Timeout,
        "p07" => Outcome::Partial,
        "p08" => Outcome::BudgetExhausted,
        "p09" if stage_a => Outcome::SketchFailed,
        "p09" => Outcome::Proved,
        other => panic!("no expectation for {other}"),
    }
}

/// Statements the fixture is designed to prove.
pub fn expected_solved() -> Vec<&'static str> {
    vec!["p01", "p02", "p03", "p05", "p09", "p10"]
}

fn solved_state(id_suffix: &str) -> MockState {
    MockState {
        state_id: format!("st_{id_suffix}"),
        goal_pretty: id_suffix.to_string(),
        transitions: vec![MockTransition {
            tactic: "linarith".into(),
            outcome: "solved".into(),
            next: None,
            message: None,
            delay_ms: 0,
        }],
    }
}

pub struct Fixture {
    pub store: TranscriptStore,
    pub mock: MockFixture,
}

impl Fixture {
    fn record(&self, model: &str, messages: Vec<ChatMessage>, sampling: &SamplingParams, responses: Vec<String>, logprobs: Option<Vec<f64>>) {
        let fingerprint = request_fingerprint(model, &messages, sampling);
        let token_counts = responses.iter().map(|r| approx_tokens(r)).collect();
        self.store
            .append(TranscriptRecord {
                fingerprint,
                request: ChatRequest {
                    model: model.into(),
                    messages,
                    temperature: sampling.temperature,
                    top_p: sampling.top_p,
                    max_tokens: sampling.max_tokens,
                    n: sampling.n,
                    seed: sampling.seed,
                    logprobs: None,
                },
                responses,
                token_counts,
                logprobs,
            })
            .unwrap();
    }

    fn record_stage_a(&self, stmt: &FormalStatement, k: u64) {
        let config = stage_a_config();
        let draft_sampling = config.sampling_for("qwq").with_seed(k);
        let messages = render_draft_prompt(stmt, DraftFormat::ConciseSteps, false).unwrap();
        let draft_text = draft_for(&stmt.id);
        self.record("qwq", messages, &draft_sampling, vec![draft_text.to_string()], None);

        let answer = strip_thinking(draft_text);
        if answer.trim().is_empty() {
            return; // the draft fails; the sketch call never happens
        }
        let parsed = parse_draft_steps(&answer);
        let draft = Draft {
            statement_id: stmt.id.clone(),
            steps: parsed.steps,
            raw_answer: answer,
            format: DraftFormat::ConciseSteps,
            tokens: Default::default(),
            non_conforming: parsed.non_conforming,
            reordered: parsed.reordered,
        };
        let sketch_sampling = config.sampling_for("v3").with_seed(k);
        let messages = render_sketch_prompt(stmt, Some(&draft)).unwrap();
        self.record(
            "v3",
            messages,
            &sketch_sampling,
            vec![sketch_for(&stmt.id, k, true)],
            None,
        );
    }

    fn record_stage_b(&self, stmt: &FormalStatement) {
        let config = stage_b_config();
        let sampling = config.sampling_for("v3").with_seed(0);
        let messages = render_sketch_prompt(stmt, None).unwrap();
        self.record("v3", messages, &sampling, vec![sketch_for(&stmt.id, 0, false)], None);
    }

    /// Prover transcripts for p10's two-step chain, for one seed.
    fn record_prover_chain(&self, seed: u64) {
        let base = stage_a_config().sampling_for("bfs").with_seed(seed);
        let sampling = SamplingParams { n: 8, ..base };
        for (goal, tactic) in [("CHAIN_p10", "apply chain_lemma"), ("CHAIN_p10_mid", "exact chain_finish")] {
            let messages = vec![ChatMessage::user(goal)];
            let mut responses: Vec<String> = vec![tactic.to_string()];
            responses.extend((1..8).map(|i| format!("wrong_guess_{i}")));
            let logprobs = Some(vec![-0.2, -1.0, -1.1, -1.2, -1.3, -1.4, -1.5, -1.6]);
            self.record("bfs", messages, &sampling, responses, logprobs);
        }
    }
}

/// Build the complete offline fixture in memory.
pub fn build_fixture(transcripts_path: &Path) -> Fixture {
    let fixture = Fixture {
        store: TranscriptStore::open(transcripts_path).unwrap(),
        mock: MockFixture::default(),
    };
    for stmt in statements() {
        for k in 0..2 {
            fixture.record_stage_a(&stmt, k);
        }
        fixture.record_stage_b(&stmt);
    }
    for seed in 0..2 {
        fixture.record_prover_chain(seed);
    }

    let mut mock = MockFixture {
        error_rules: vec![MockRule {
            pattern: "BROKEN_HEADER".into(),
            message: "unexpected token".into(),
            when_absent: None,
        }],
        verify_delays: vec![VerifyDelay { pattern: "theorem p06".into(), delay_ms: 60_000 }],
        ..Default::default()
    };
    for id in STATEMENT_IDS {
        mock.error_rules.push(MockRule {
            pattern: format!("bad_line_{id}"),
            message: "unknown identifier".into(),
            when_absent: None,
        });
        mock.states.push(solved_state(&format!("G_{id}")));
        mock.states.push(solved_state(&format!("GA_{id}")));
        // GB_* and DEAD_* goals have no states: unsolvable.
    }
    // p03's hinted route: prune to the hinted hypotheses, then close.
    mock.states.push(MockState {
        state_id: "st_H_p03".into(),
        goal_pretty: "H_p03".into(),
        transitions: vec![MockTransition {
            tactic: "clear * - hA h1".into(),
            outcome: "next".into(),
            next: Some("st_H_p03_pruned".into()),
            message: None,
            delay_ms: 0,
        }],
    });
    mock.states.push(solved_state("H_p03_pruned"));
    // p10's chain: solvable only through the prover's proposals.
    mock.states.push(MockState {
        state_id: "st_CHAIN_p10".into(),
        goal_pretty: "CHAIN_p10".into(),
        transitions: vec![MockTransition {
            tactic: "apply chain_lemma".into(),
            outcome: "next".into(),
            next: Some("st_CHAIN_p10_mid".into()),
            message: None,
            delay_ms: 0,
        }],
    });
    mock.states.push(MockState {
        state_id: "st_CHAIN_p10_mid".into(),
        goal_pretty: "CHAIN_p10_mid".into(),
        transitions: vec![MockTransition {
            tactic: "exact chain_finish".into(),
            outcome: "solved".into(),
            next: None,
            message: None,
            delay_ms: 0,
        }],
    });

    Fixture {
        store: fixture.store,
        mock,
    }
}

/// Materialize the fixture into a directory: benchmark, transcripts, mock
/// verifier table, and a run config. Returns the config path.
pub fn write_fixture_dir(dir: &Path) -> PathBuf {
    let transcripts = dir.join("transcripts.jsonl");
    let fixture = build_fixture(&transcripts);

    let mock_path = dir.join("verifier.json");
    std::fs::write(&mock_path, serde_json::to_string_pretty(&fixture.mock).unwrap()).unwrap();

    let benchmark_path = dir.join("benchmark.jsonl");
    let mut file = std::fs::File::create(&benchmark_path).unwrap();
    for stmt in statements() {
        let tags = if stmt.id == "p01" || stmt.id == "p10" {
            r#", "tags": ["IMO"]"#
        } else {
            ""
        };
        writeln!(
            file,
            r#"{{"name": "{}", "header": "{}", "formal_statement": "{}", "split": "test"{}}}"#,
            stmt.id, stmt.header, stmt.statement, tags
        )
        .unwrap();
    }

    let config_path = dir.join("run.toml");
    std::fs::write(&config_path, toml::to_string(&run_config()).unwrap()).unwrap();
    config_path
}

fn endpoint(model: &str) -> dsp_gateway::ModelEndpoint {
    dsp_gateway::ModelEndpoint {
        model_id: model.into(),
        base_url: "https://replay.invalid/v1".into(),
        api_key_env: String::new(),
        sampling_defaults: SamplingParams::default(),
        request_timeout_secs: 5,
        max_retries: 0,
    }
}

/// The run configuration the fixture ships: replay + mock, one two-stage
/// plan, a 2 s attempt budget (long enough for every scripted statement
/// except the deliberately slow one).
pub fn run_config() -> dsp_cli::config::RunConfig {
    use dsp_cli::config::{MockVerifierSection, PlanSection, ReplaySection, RunConfig, RunSection};
    RunConfig {
        run: RunSection {
            deadline_secs: 2,
            // Two sketch workers can both be sleeping inside the scripted
            // slow statement; keep two more free so nothing else starves.
            sketch_workers: 4,
            ..Default::default()
        },
        replay: ReplaySection {
            transcript_store: Some("transcripts.jsonl".into()),
        },
        verifier_mock: MockVerifierSection {
            fixture: Some("verifier.json".into()),
        },
        verifier_repl: None,
        repair: Default::default(),
        search: None,
        symbolic_tactics: None,
        endpoints: vec![endpoint("qwq"), endpoint("v3"), endpoint("bfs")],
        plans: vec![PlanSection {
            name: "fixture".into(),
            stop_on_success: true,
            stages: vec![
                dsp_orchestrator::PlanStage { config: stage_a_config(), k: 2 },
                dsp_orchestrator::PlanStage { config: stage_b_config(), k: 1 },
            ],
        }],
    }
}
