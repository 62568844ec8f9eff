use std::path::PathBuf;

use anyhow::Context;

use dsp_eval::{compute_metrics, emit_report, load_benchmark, write_report_files, ReportFormat};
use dsp_orchestrator::AttemptStore;

pub fn run(store_path: PathBuf, benchmark_path: PathBuf, out: Option<PathBuf>) -> anyhow::Result<()> {
    let store = AttemptStore::open(&store_path)
        .map_err(|e| anyhow::anyhow!("opening store {}: {e}", store_path.display()))?;
    let benchmark = load_benchmark(&benchmark_path)
        .with_context(|| format!("loading benchmark {}", benchmark_path.display()))?;

    let metrics = compute_metrics(&store.records(), &benchmark);
    let out_dir = out
        .or_else(|| store_path.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    write_report_files(&metrics, &out_dir)
        .map_err(|e| anyhow::anyhow!("writing report files: {e}"))?;

    print!("{}", emit_report(&metrics, ReportFormat::Text));
    eprintln!(
        "wrote {} and {}",
        out_dir.join("report.txt").display(),
        out_dir.join("report.json").display()
    );
    Ok(())
}
