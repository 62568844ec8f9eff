use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::{ChatRequest, GatewayError};

/// One recorded exchange: the full request, the completion strings, and
/// their token counts (plus log-probabilities when the endpoint reported
/// them). One JSON record per line, append-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub fingerprint: String,
    pub request: ChatRequest,
    pub responses: Vec<String>,
    pub token_counts: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<Vec<f64>>,
}

/// Content-addressed transcript store backing the replay backend and the
/// live backend's recorder. Concurrent reads are cheap; appends serialize
/// on the writer.
pub struct TranscriptStore {
    records: RwLock<HashMap<String, TranscriptRecord>>,
    writer: Mutex<Option<File>>,
    path: Option<PathBuf>,
}

impl TranscriptStore {
    /// In-memory store with no file backing (for tests and dry runs).
    pub fn in_memory() -> Self {
        TranscriptStore {
            records: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
            path: None,
        }
    }

    /// Open (or create) a file-backed store, loading existing records. A
    /// torn trailing line from a crashed writer is truncated away so later
    /// appends start on a clean line boundary.
    pub fn open(path: &Path) -> Result<Self, GatewayError> {
        let mut records = HashMap::new();
        if path.exists() {
            let content =
                std::fs::read_to_string(path).map_err(|e| GatewayError::Store(e.to_string()))?;
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
                    match serde_json::from_str::<TranscriptRecord>(line) {
                        Ok(record) if terminated => {
                            // First record wins: replays must not drift when
                            // a live run appended a duplicate fingerprint.
                            records.entry(record.fingerprint.clone()).or_insert(record);
                            good_end = end;
                        }
                        Ok(_) | Err(_) if end == content.len() => {
                            tracing::warn!("dropping torn trailing transcript line");
                        }
                        Ok(_) => unreachable!("unterminated segment must be last"),
                        Err(e) => {
                            return Err(GatewayError::Store(format!(
                                "malformed transcript record: {e}"
                            )));
                        }
                    }
                }
                offset = end;
            }
            if good_end < content.len() {
                let file = OpenOptions::new()
                    .write(true)
                    .open(path)
                    .map_err(|e| GatewayError::Store(e.to_string()))?;
                file.set_len(good_end as u64)
                    .map_err(|e| GatewayError::Store(e.to_string()))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GatewayError::Store(e.to_string()))?;
        Ok(TranscriptStore {
            records: RwLock::new(records),
            writer: Mutex::new(Some(file)),
            path: Some(path.to_path_buf()),
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

    pub fn get(&self, fingerprint: &str) -> Option<TranscriptRecord> {
        self.records.read().get(fingerprint).cloned()
    }

    /// Append a record (skipped if the fingerprint is already present).
    pub fn append(&self, record: TranscriptRecord) -> Result<(), GatewayError> {
        {
            let mut records = self.records.write();
            if records.contains_key(&record.fingerprint) {
                return Ok(());
            }
            records.insert(record.fingerprint.clone(), record.clone());
        }
        let mut writer = self.writer.lock();
        if let Some(file) = writer.as_mut() {
            let mut line =
                serde_json::to_string(&record).map_err(|e| GatewayError::Store(e.to_string()))?;
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|e| GatewayError::Store(e.to_string()))?;
        }
        Ok(())
    }
}
