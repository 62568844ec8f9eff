use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use dsp_core::FormalStatement;

use crate::EvalError;

/// A validated benchmark: problems plus tag-indexed subsets (e.g. "IMO",
/// "AIME", "AMC", or the split name).
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSet {
    pub name: String,
    pub problems: Vec<FormalStatement>,
    pub subsets: BTreeMap<String, BTreeSet<String>>,
}

impl BenchmarkSet {
    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<String> {
        self.problems.iter().map(|p| p.id.clone()).collect()
    }
}

/// Field-name mapping for benchmark files whose conventions differ across
/// releases. Defaults match the documented record format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub name: String,
    pub header: String,
    pub formal_statement: String,
    pub informal_statement: String,
    pub informal_proof: String,
    pub split: String,
    pub tags: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            name: "name".into(),
            header: "header".into(),
            formal_statement: "formal_statement".into(),
            informal_statement: "informal_statement".into(),
            informal_proof: "informal_proof".into(),
            split: "split".into(),
            tags: "tags".into(),
        }
    }
}

/// Load a record-per-line benchmark file with the default field names.
pub fn load_benchmark(path: &Path) -> Result<BenchmarkSet, EvalError> {
    load_benchmark_with_map(path, &FieldMap::default())
}

/// Load a benchmark with custom field names. Every record must carry a
/// unique name and a formal statement; malformed records fail with their
/// line number.
pub fn load_benchmark_with_map(path: &Path, map: &FieldMap) -> Result<BenchmarkSet, EvalError> {
    let text = std::fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    let benchmark_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "benchmark".into());

    let mut problems = Vec::new();
    let mut seen = BTreeSet::new();
    let mut subsets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(line).map_err(|e| EvalError::MalformedRecord {
            path: path_str.clone(),
            line: line_no,
            reason: e.to_string(),
        })?;
        let field_str = |key: &str| -> Option<String> {
            value.get(key).and_then(Value::as_str).map(String::from)
        };
        let id = field_str(&map.name).ok_or_else(|| EvalError::MalformedRecord {
            path: path_str.clone(),
            line: line_no,
            reason: format!("missing string field `{}`", map.name),
        })?;
        let statement = field_str(&map.formal_statement).ok_or_else(|| {
            EvalError::MalformedRecord {
                path: path_str.clone(),
                line: line_no,
                reason: format!("missing string field `{}`", map.formal_statement),
            }
        })?;
        if statement.trim().is_empty() {
            return Err(EvalError::MalformedRecord {
                path: path_str.clone(),
                line: line_no,
                reason: "empty formal statement".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(EvalError::DuplicateId {
                path: path_str,
                id,
            });
        }

        let mut problem = FormalStatement::new(&id, field_str(&map.header).unwrap_or_default(), statement);
        problem.informal_statement = field_str(&map.informal_statement);
        problem.informal_proof = field_str(&map.informal_proof);
        problem.source = benchmark_name.clone();

        if let Some(split) = field_str(&map.split) {
            subsets.entry(split).or_default().insert(id.clone());
        }
        if let Some(tags) = value.get(&map.tags).and_then(Value::as_array) {
            for tag in tags.iter().filter_map(Value::as_str) {
                subsets.entry(tag.to_string()).or_default().insert(id.clone());
            }
        }
        problems.push(problem);
    }

    Ok(BenchmarkSet {
        name: benchmark_name,
        problems,
        subsets,
    })
}
