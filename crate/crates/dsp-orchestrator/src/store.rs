use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};

use dsp_core::{AttemptRecord, Outcome};

use crate::OrchestratorError;

/// Append-only attempt store: one self-describing JSON record per line.
/// Reloadable for metric recomputation and resume; a torn trailing line
/// from a crashed writer is dropped on load, so the surviving prefix is
/// always consistent.
pub struct AttemptStore {
    path: Option<PathBuf>,
    writer: Mutex<Option<File>>,
    records: RwLock<Vec<AttemptRecord>>,
    ids: RwLock<HashSet<String>>,
}

impl AttemptStore {
    pub fn in_memory() -> Self {
        AttemptStore {
            path: None,
            writer: Mutex::new(None),
            records: RwLock::new(Vec::new()),
            ids: RwLock::new(HashSet::new()),
        }
    }

    /// Open (or create) a file-backed store, loading every intact record.
    /// A torn tail from a crashed writer is truncated away so later appends
    /// start on a clean line boundary; the dropped attempt simply re-runs.
    pub fn open(path: &Path) -> Result<Self, OrchestratorError> {
        let mut records = Vec::new();
        let mut ids = HashSet::new();
        if path.exists() {
            let content =
                std::fs::read_to_string(path).map_err(|e| OrchestratorError::Store(e.to_string()))?;
            let mut good_end = 0usize;
            let mut offset = 0usize;
            for segment in content.split_inclusive('\n') {
                let end = offset + segment.len();
                let terminated = segment.ends_with('\n');
                let line = segment.trim_end_matches(['\n', '\r']);
                if line.trim().is_empty() {
                    if terminated {
                        good_end = end;
                    }
                } else {
                    match serde_json::from_str::<AttemptRecord>(line) {
                        Ok(record) if terminated => {
                            if ids.insert(record.attempt_id.clone()) {
                                records.push(record);
                            }
                            good_end = end;
                        }
                        Ok(_) | Err(_) if end == content.len() => {
                            tracing::warn!("dropping torn trailing attempt record");
                        }
                        Ok(_) => unreachable!("unterminated segment must be last"),
                        Err(e) => {
                            return Err(OrchestratorError::Store(format!(
                                "malformed attempt record: {e}"
                            )))
                        }
                    }
                }
                offset = end;
            }
            if good_end < content.len() {
                let file = OpenOptions::new()
                    .write(true)
                    .open(path)
                    .map_err(|e| OrchestratorError::Store(e.to_string()))?;
                file.set_len(good_end as u64)
                    .map_err(|e| OrchestratorError::Store(e.to_string()))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| OrchestratorError::Store(e.to_string()))?;
        Ok(AttemptStore {
            path: Some(path.to_path_buf()),
            writer: Mutex::new(Some(file)),
            records: RwLock::new(records),
            ids: RwLock::new(ids),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.read().is_empty()
    }

    /// Persist one record. Returns false (without writing) when the
    /// attempt id is already present, so replays and resumes stay
    /// duplicate-free.
    pub fn append(&self, record: &AttemptRecord) -> Result<bool, OrchestratorError> {
        {
            let mut ids = self.ids.write();
            if !ids.insert(record.attempt_id.clone()) {
                tracing::warn!(id = %record.attempt_id, "duplicate attempt id; not persisted");
                return Ok(false);
            }
        }
        {
            let mut writer = self.writer.lock();
            if let Some(file) = writer.as_mut() {
                let mut line = serde_json::to_string(record)
                    .map_err(|e| OrchestratorError::Store(e.to_string()))?;
                line.push('\n');
                file.write_all(line.as_bytes())
                    .and_then(|_| file.flush())
                    .map_err(|e| OrchestratorError::Store(e.to_string()))?;
            }
        }
        self.records.write().push(record.clone());
        Ok(true)
    }

    pub fn records(&self) -> Vec<AttemptRecord> {
        self.records.read().clone()
    }

    pub fn has_attempt(&self, attempt_id: &str) -> bool {
        self.ids.read().contains(attempt_id)
    }

    /// Statement ids with at least one proved record.
    pub fn proved_statements(&self) -> HashSet<String> {
        self.records
            .read()
            .iter()
            .filter(|r| r.outcome == Outcome::Proved)
            .map(|r| r.statement_id.clone())
            .collect()
    }
}
