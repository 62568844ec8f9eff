//! Benchmark ingestion, metric computation, and report emission: pass@k
//! curves, ensemble composition arithmetic, translation-rate and
//! token-cost statistics.

mod benchmark;
mod error;
mod metrics;
mod report;

pub use benchmark::{load_benchmark, load_benchmark_with_map, BenchmarkSet, FieldMap};
pub use error::EvalError;
pub use metrics::{
    compute_metrics, ensemble_deltas, pass_at_k_curve, token_stats, translation_stats,
    ConfigMetrics, EnsembleDeltas, MetricsReport, StageDelta, TokenRow, TranslationStats,
};
pub use report::{emit_report, write_report_files, ReportFormat};
