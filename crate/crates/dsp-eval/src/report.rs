use std::fmt::Write as _;
use std::path::Path;

use crate::{EvalError, MetricsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Deterministic report document: identical metrics give byte-identical
/// output in either format.
pub fn emit_report(metrics: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(metrics).expect("metrics serialize");
            out.push('\n');
            out
        }
        ReportFormat::Text => render_text(metrics),
    }
}

fn render_text(metrics: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "benchmark: {} ({} problems)", metrics.benchmark, metrics.total_problems);
    let _ = writeln!(out);
    for config in &metrics.configs {
        let _ = writeln!(out, "config {} ({})", config.label, config.config_hash);
        let _ = writeln!(
            out,
            "  attempts: {}  solved: {}  pass rate: {:.1}%",
            config.attempts,
            config.solved.len(),
            config.pass_rate * 100.0
        );
        if !config.curve.is_empty() {
            let points: Vec<String> = [1usize, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
                .iter()
                .filter(|&&j| j <= config.curve.len())
                .map(|&j| format!("@{}={}", j, config.curve[j - 1]))
                .collect();
            let _ = writeln!(out, "  curve: {}", points.join(" "));
        }
        let outcomes: Vec<String> = config
            .outcomes
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(out, "  outcomes: {}", outcomes.join(" "));
        if let Some(translation) = &config.translation {
            let _ = writeln!(
                out,
                "  translation: ATR {:.1}% MTR {:.1}% over {} sketches",
                translation.average * 100.0,
                translation.median * 100.0,
                translation.sketches
            );
        }
        let _ = writeln!(
            out,
            "  tokens/pass: answer {:.0} thinking {:.0} prover {:.0} (total {})",
            config.tokens.avg_answer_tokens,
            config.tokens.avg_thinking_tokens,
            config.tokens.avg_prover_tokens,
            config.tokens.total_tokens
        );
        for (tag, solved) in &config.subset_solved {
            let _ = writeln!(out, "  subset {tag}: {solved} solved");
        }
        let _ = writeln!(out);
    }
    if let Some(ensemble) = &metrics.ensemble {
        let _ = writeln!(out, "ensemble:");
        let _ = writeln!(out, "  baseline: +{}", ensemble.baseline_solved);
        for (i, stage) in ensemble.stages.iter().enumerate() {
            let _ = writeln!(
                out,
                "  stage {}: (+{}, -{}) -> +{} (accumulated {})",
                i + 2,
                stage.new_vs_baseline,
                stage.missing_vs_baseline,
                stage.accumulative_gain,
                stage.accumulative_total
            );
        }
        let _ = writeln!(out, "  Total: {}", ensemble.total);
        let _ = writeln!(out);
    }
    let _ = writeln!(
        out,
        "union: {} solved ({:.1}%)",
        metrics.union_solved,
        metrics.union_pass_rate * 100.0
    );
    for (tag, solved) in &metrics.subset_union {
        let _ = writeln!(out, "union subset {tag}: {solved} solved");
    }
    out
}

/// Write `report.txt` and `report.json` under `dir`.
pub fn write_report_files(metrics: &MetricsReport, dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.txt"), emit_report(metrics, ReportFormat::Text))?;
    std::fs::write(dir.join("report.json"), emit_report(metrics, ReportFormat::Json))?;
    Ok(())
}
