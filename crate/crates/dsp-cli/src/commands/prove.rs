use std::path::PathBuf;

use anyhow::Context;

use dsp_eval::load_benchmark;
use dsp_orchestrator::{run_plan, AttemptStore};

use crate::config::RunConfig;

pub struct ProveArgs {
    pub config: PathBuf,
    pub benchmark: PathBuf,
    pub out: Option<PathBuf>,
    pub mode: Option<String>,
    pub plan: Option<String>,
    pub resume: bool,
    pub k: Option<u64>,
    pub deadline_secs: Option<u64>,
}

pub fn run(args: ProveArgs) -> anyhow::Result<()> {
    let mut config = RunConfig::load(&args.config)?;
    config.anchor_paths(&args.config);

    let benchmark = load_benchmark(&args.benchmark)
        .with_context(|| format!("loading benchmark {}", args.benchmark.display()))?;
    anyhow::ensure!(!benchmark.is_empty(), "benchmark is empty");

    let mut plan = config.plan(args.plan.as_deref())?;
    if let Some(k) = args.k {
        anyhow::ensure!(k >= 1, "--k must be at least 1");
        for stage in &mut plan.stages {
            stage.k = k;
        }
    }

    let out_dir = args
        .out
        .clone()
        .or_else(|| config.run.out_dir.clone())
        .context("no output directory: pass --out or set [run].out_dir")?;
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let store_path = out_dir.join("attempts.jsonl");
    let store = AttemptStore::open(&store_path)
        .map_err(|e| anyhow::anyhow!("opening attempt store: {e}"))?;

    let ctx = config.build_context(args.mode.as_deref())?;
    let pipeline = config.pipeline_config(args.deadline_secs, plan.stop_on_success);

    println!(
        "proving {} statements with {} stage(s), records -> {}",
        benchmark.len(),
        plan.stages.len(),
        store_path.display()
    );
    let report = run_plan(&ctx, &benchmark.problems, &plan, &store, &pipeline, args.resume)
        .map_err(|e| anyhow::anyhow!("run failed: {e}"))?;

    println!(
        "done: {} solved / {} statements; {} records persisted ({} resumed, {} skipped after solve)",
        report.solved_statements,
        benchmark.len(),
        report.records_persisted,
        report.resumed,
        report.skipped_after_solve,
    );
    Ok(())
}
