use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use dsp_core::{AttemptRecord, Outcome};

use crate::BenchmarkSet;

/// Mean and lower-median of per-sketch translation rates. The median over
/// an even count is the lower median — deterministic and documented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationStats {
    pub average: f64,
    pub median: f64,
    pub sketches: usize,
}

/// Average per-sketch translation rates (ATR/MTR).
pub fn translation_stats(rates: &[f64]) -> Option<TranslationStats> {
    if rates.is_empty() {
        return None;
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let average = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let median = sorted[(sorted.len() - 1) / 2];
    Some(TranslationStats {
        average,
        median,
        sketches: sorted.len(),
    })
}

/// Per-config token-cost row: averages are per pass, the total is what the
/// whole run cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRow {
    pub config_hash: String,
    pub label: String,
    pub passes: usize,
    pub avg_answer_tokens: f64,
    pub avg_thinking_tokens: f64,
    pub avg_prover_tokens: f64,
    /// Average per-pass tokens by model id.
    pub per_model: BTreeMap<String, f64>,
    /// Per-pass average × passes.
    pub total_tokens: u64,
}

/// Token usage grouped by configuration, in first-appearance order. Groups
/// with no records are simply absent.
pub fn token_stats(records: &[AttemptRecord]) -> Vec<TokenRow> {
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<&AttemptRecord>> = HashMap::new();
    for record in records {
        let hash = record.config.hash();
        if !grouped.contains_key(&hash) {
            order.push(hash.clone());
        }
        grouped.entry(hash).or_default().push(record);
    }
    order
        .into_iter()
        .map(|hash| {
            let group = &grouped[&hash];
            let passes = group.len();
            let sum = |f: fn(&AttemptRecord) -> u64| group.iter().map(|r| f(r)).sum::<u64>();
            let answer = sum(|r| r.tokens.answer_tokens);
            let thinking = sum(|r| r.tokens.thinking_tokens);
            let prover = sum(|r| r.tokens.prover_tokens);
            let mut per_model: BTreeMap<String, f64> = BTreeMap::new();
            for record in group.iter() {
                for (model, count) in &record.tokens.per_model {
                    *per_model.entry(model.clone()).or_insert(0.0) += *count as f64;
                }
            }
            for count in per_model.values_mut() {
                *count /= passes as f64;
            }
            TokenRow {
                config_hash: hash,
                label: group[0].config.label(),
                passes,
                avg_answer_tokens: answer as f64 / passes as f64,
                avg_thinking_tokens: thinking as f64 / passes as f64,
                avg_prover_tokens: prover as f64 / passes as f64,
                per_model,
                total_tokens: answer + thinking + prover,
            }
        })
        .collect()
}

/// Point `j` (1-based) counts statements with at least one proof among
/// attempts 1..=j of this config. Monotone non-decreasing by construction.
pub fn pass_at_k_curve(
    records: &[AttemptRecord],
    config_hash: &str,
    benchmark: &BenchmarkSet,
) -> Vec<usize> {
    let ids = benchmark.ids();
    let mut first_solve: HashMap<&str, u64> = HashMap::new();
    let mut max_attempt = 0u64;
    for record in records {
        if record.config.hash() != config_hash || !ids.contains(record.statement_id.as_str()) {
            continue;
        }
        let attempt = record.k_index().unwrap_or(0) + 1;
        max_attempt = max_attempt.max(attempt);
        if record.outcome == Outcome::Proved {
            first_solve
                .entry(record.statement_id.as_str())
                .and_modify(|a| *a = (*a).min(attempt))
                .or_insert(attempt);
        }
    }
    (1..=max_attempt)
        .map(|j| first_solve.values().filter(|&&a| a <= j).count())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDelta {
    /// Problems this stage solves that the baseline does not (+x).
    pub new_vs_baseline: usize,
    /// Baseline problems this stage leaves unsolved (−y).
    pub missing_vs_baseline: usize,
    /// New contribution over everything accumulated before this stage.
    pub accumulative_gain: usize,
    /// Union size after this stage.
    pub accumulative_total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleDeltas {
    pub baseline_solved: usize,
    /// One entry per stage after the baseline.
    pub stages: Vec<StageDelta>,
    /// Accumulative union over all stages.
    pub total: usize,
}

/// Ensemble composition arithmetic over ordered stage solved-sets; the
/// first set is the baseline.
pub fn ensemble_deltas(stage_sets: &[BTreeSet<String>]) -> EnsembleDeltas {
    let baseline = stage_sets.first().cloned().unwrap_or_default();
    let mut accumulated = baseline.clone();
    let mut stages = Vec::new();
    for set in stage_sets.iter().skip(1) {
        let gain = set.difference(&accumulated).count();
        accumulated.extend(set.iter().cloned());
        stages.push(StageDelta {
            new_vs_baseline: set.difference(&baseline).count(),
            missing_vs_baseline: baseline.difference(set).count(),
            accumulative_gain: gain,
            accumulative_total: accumulated.len(),
        });
    }
    EnsembleDeltas {
        baseline_solved: baseline.len(),
        stages,
        total: accumulated.len(),
    }
}

/// Everything the report emits for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigMetrics {
    pub config_hash: String,
    pub label: String,
    pub attempts: usize,
    pub solved: BTreeSet<String>,
    pub curve: Vec<usize>,
    /// Final curve point over the benchmark size.
    pub pass_rate: f64,
    pub outcomes: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<TranslationStats>,
    pub tokens: TokenRow,
    /// Solved count per benchmark subset tag.
    pub subset_solved: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub benchmark: String,
    pub total_problems: usize,
    pub configs: Vec<ConfigMetrics>,
    /// Present when more than one configuration appears in the store.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleDeltas>,
    /// Union of solved sets across configs.
    pub union_solved: usize,
    pub union_pass_rate: f64,
    /// Union solved per subset tag.
    pub subset_union: BTreeMap<String, usize>,
}

fn outcome_key(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Proved => "proved",
        Outcome::Partial => "partial",
        Outcome::SketchFailed => "sketch_failed",
        Outcome::DraftFailed => "draft_failed",
        Outcome::Timeout => "timeout",
        Outcome::BudgetExhausted => "budget_exhausted",
    }
}

/// Full metric computation over an attempt store snapshot. Configs appear
/// in first-appearance order, which is the ensemble stage order for stores
/// written by the plan runner.
pub fn compute_metrics(records: &[AttemptRecord], benchmark: &BenchmarkSet) -> MetricsReport {
    let ids = benchmark.ids();
    let token_rows = token_stats(records);
    let mut configs = Vec::new();
    let mut union: BTreeSet<String> = BTreeSet::new();
    let mut stage_sets = Vec::new();

    for row in token_rows {
        let group: Vec<&AttemptRecord> = records
            .iter()
            .filter(|r| r.config.hash() == row.config_hash)
            .collect();
        let solved: BTreeSet<String> = group
            .iter()
            .filter(|r| r.outcome == Outcome::Proved && ids.contains(r.statement_id.as_str()))
            .map(|r| r.statement_id.clone())
            .collect();
        let curve = pass_at_k_curve(records, &row.config_hash, benchmark);
        let mut outcomes: BTreeMap<String, usize> = BTreeMap::new();
        for record in &group {
            *outcomes.entry(outcome_key(record.outcome).to_string()).or_insert(0) += 1;
        }
        let rates: Vec<f64> = group
            .iter()
            .filter_map(|r| r.sketch.as_ref().map(|s| s.translation_rate))
            .collect();
        let subset_solved = benchmark
            .subsets
            .iter()
            .map(|(tag, members)| (tag.clone(), solved.intersection(members).count()))
            .collect();
        union.extend(solved.iter().cloned());
        stage_sets.push(solved.clone());
        configs.push(ConfigMetrics {
            label: row.label.clone(),
            config_hash: row.config_hash.clone(),
            attempts: group.len(),
            pass_rate: if benchmark.is_empty() {
                0.0
            } else {
                solved.len() as f64 / benchmark.len() as f64
            },
            solved,
            curve,
            outcomes,
            translation: translation_stats(&rates),
            tokens: row,
            subset_solved,
        });
    }

    let ensemble = (configs.len() > 1).then(|| ensemble_deltas(&stage_sets));
    let subset_union = benchmark
        .subsets
        .iter()
        .map(|(tag, members)| (tag.clone(), union.intersection(members).count()))
        .collect();
    MetricsReport {
        schema_version: 1,
        benchmark: benchmark.name.clone(),
        total_problems: benchmark.len(),
        configs,
        ensemble,
        union_solved: union.len(),
        union_pass_rate: if benchmark.is_empty() {
            0.0
        } else {
            union.len() as f64 / benchmark.len() as f64
        },
        subset_union,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsp_core::{new_attempt_id, DraftFormat, PhaseConfig, TokenUsage};
    use proptest::prelude::*;

    fn config(sketch_model: &str) -> PhaseConfig {
        PhaseConfig {
            draft_model: None,
            sketch_model: sketch_model.into(),
            prover_model: None,
            draft_format: DraftFormat::None,
            use_informal_proof: false,
            sampling: Default::default(),
        }
    }

    fn record(stmt: &str, cfg: &PhaseConfig, k: u64, outcome: Outcome) -> AttemptRecord {
        AttemptRecord {
            attempt_id: new_attempt_id(stmt, &cfg.hash(), k),
            statement_id: stmt.into(),
            config: cfg.clone(),
            draft: None,
            sketch: None,
            outcome,
            proof_text: (outcome == Outcome::Proved).then(|| "trivial".into()),
            tokens: TokenUsage::default(),
            wall_clock_secs: 0.0,
            prover_samples: 0,
            failure_reason: None,
            created_at: None,
        }
    }

    fn benchmark(n: usize) -> BenchmarkSet {
        BenchmarkSet {
            name: "synthetic".into(),
            problems: (0..n)
                .map(|i| dsp_core::FormalStatement::new(format!("p{i:03}"), "", "theorem t : True := by"))
                .collect(),
            subsets: BTreeMap::new(),
        }
    }

    #[test]
    fn curve_steps_at_the_solving_attempt() {
        let cfg = config("v3");
        let bench = benchmark(4);
        let records = vec![
            record("p000", &cfg, 0, Outcome::Partial),
            record("p000", &cfg, 1, Outcome::Partial),
            record("p000", &cfg, 2, Outcome::Proved),
            record("p001", &cfg, 0, Outcome::SketchFailed),
        ];
        let curve = pass_at_k_curve(&records, &cfg.hash(), &bench);
        assert_eq!(curve, vec![0, 0, 1]);
    }

    #[test]
    fn empty_store_gives_empty_curve() {
        let cfg = config("v3");
        assert!(pass_at_k_curve(&[], &cfg.hash(), &benchmark(3)).is_empty());
    }

    #[test]
    fn pass_rate_reproduces_the_headline_fraction() {
        // 181 of 244 solved within the budget.
        let cfg = config("v3");
        let bench = benchmark(244);
        let mut records = Vec::new();
        for i in 0..244 {
            let outcome = if i < 181 { Outcome::Proved } else { Outcome::Partial };
            records.push(record(&format!("p{i:03}"), &cfg, (i % 128) as u64, outcome));
        }
        let report = compute_metrics(&records, &bench);
        let rate = report.configs[0].pass_rate * 100.0;
        assert!((rate - 74.2).abs() < 0.05, "got {rate}");
    }

    #[test]
    fn stage_equal_to_baseline_is_zero_delta() {
        let set: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let deltas = ensemble_deltas(&[set.clone(), set.clone()]);
        assert_eq!(deltas.stages[0].new_vs_baseline, 0);
        assert_eq!(deltas.stages[0].missing_vs_baseline, 0);
        assert_eq!(deltas.total, 2);
    }

    #[test]
    fn disjoint_stage_contributes_everything() {
        let a: BTreeSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let b: BTreeSet<String> = ["c"].iter().map(|s| s.to_string()).collect();
        let deltas = ensemble_deltas(&[a, b]);
        assert_eq!(deltas.stages[0].new_vs_baseline, 1);
        assert_eq!(deltas.stages[0].missing_vs_baseline, 2);
        assert_eq!(deltas.stages[0].accumulative_gain, 1);
        assert_eq!(deltas.total, 3);
    }

    #[test]
    fn translation_stats_mean_and_lower_median() {
        // Six full-rate sketches and four at 0.605 average to 0.842 with a
        // lower-median of 1.0.
        let mut rates = vec![1.0; 6];
        rates.extend([0.605; 4]);
        let stats = translation_stats(&rates).unwrap();
        assert!((stats.average - 0.842).abs() < 1e-9);
        assert_eq!(stats.median, 1.0);
        assert!(translation_stats(&[]).is_none());
        // Odd count: plain middle element.
        let stats = translation_stats(&[0.2, 0.9, 0.5]).unwrap();
        assert_eq!(stats.median, 0.5);
    }

    #[test]
    fn token_rows_average_per_pass() {
        let cfg = config("v3");
        let mut a = record("p000", &cfg, 0, Outcome::Partial);
        a.tokens.record_chat("qwq", 500, 5000);
        let mut b = record("p001", &cfg, 0, Outcome::Partial);
        b.tokens.record_chat("qwq", 650, 6364);
        let rows = token_stats(&[a, b]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].passes, 2);
        assert!((rows[0].avg_answer_tokens - 575.0).abs() < 1e-9);
        assert!((rows[0].avg_thinking_tokens - 5682.0).abs() < 1e-9);
        assert_eq!(rows[0].total_tokens, 500 + 5000 + 650 + 6364);
    }

    #[test]
    fn single_record_averages_equal_the_record() {
        let cfg = config("v3");
        let mut a = record("p000", &cfg, 0, Outcome::Partial);
        a.tokens.record_chat("v3", 948, 0);
        let rows = token_stats(std::slice::from_ref(&a));
        assert_eq!(rows[0].avg_answer_tokens, 948.0);
        assert_eq!(rows[0].per_model["v3"], 948.0);
    }

    #[test]
    fn zero_record_groups_are_omitted() {
        assert!(token_stats(&[]).is_empty());
    }

    proptest! {
        /// pass@k curves are monotone non-decreasing on arbitrary stores.
        #[test]
        fn curves_are_monotone(outcomes in proptest::collection::vec((0usize..20, 0u64..6, prop::bool::ANY), 0..60)) {
            let cfg = config("v3");
            let bench = benchmark(20);
            let records: Vec<AttemptRecord> = outcomes
                .into_iter()
                .map(|(stmt, k, proved)| {
                    record(
                        &format!("p{stmt:03}"),
                        &cfg,
                        k,
                        if proved { Outcome::Proved } else { Outcome::Partial },
                    )
                })
                .collect();
            let curve = pass_at_k_curve(&records, &cfg.hash(), &bench);
            for window in curve.windows(2) {
                prop_assert!(window[0] <= window[1]);
            }
        }

        /// Baseline plus the accumulated gains equals the union.
        #[test]
        fn gains_sum_to_union(sets in proptest::collection::vec(
            proptest::collection::btree_set(0u32..40, 0..25),
            1..6,
        )) {
            let sets: Vec<BTreeSet<String>> = sets
                .into_iter()
                .map(|s| s.into_iter().map(|n| format!("p{n}")).collect())
                .collect();
            let deltas = ensemble_deltas(&sets);
            let gain_sum: usize = deltas.stages.iter().map(|s| s.accumulative_gain).sum();
            prop_assert_eq!(deltas.baseline_solved + gain_sum, deltas.total);
            // The union is a superset of every stage.
            let union: BTreeSet<&String> = sets.iter().flatten().collect();
            prop_assert_eq!(union.len(), deltas.total);
        }
    }
}
