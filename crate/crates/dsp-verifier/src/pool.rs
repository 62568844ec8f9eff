use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;
use sha2::{Digest, Sha256};

use crate::VerifierError;

/// Fingerprint of a header text, keying environment reuse.
pub fn header_fingerprint(header: &str) -> String {
    let digest = Sha256::digest(header.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Header-environment pool: loads each distinct header fingerprint exactly
/// once and shares the environment across all sessions that need it.
/// Concurrent openers of the same header block on one another; distinct
/// headers load in parallel.
#[derive(Default)]
pub struct HeaderPool {
    entries: Mutex<HashMap<String, Arc<Mutex<Option<u64>>>>>,
    loads: AtomicU64,
}

impl HeaderPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Environment handle for `fingerprint`, invoking `load` only on the
    /// first successful call per fingerprint. A failed load leaves the slot
    /// empty so a later open can retry.
    pub fn env_for<F>(&self, fingerprint: &str, load: F) -> Result<u64, VerifierError>
    where
        F: FnOnce() -> Result<u64, VerifierError>,
    {
        let entry = {
            let mut entries = self.entries.lock();
            entries
                .entry(fingerprint.to_string())
                .or_insert_with(|| Arc::new(Mutex::new(None)))
                .clone()
        };
        let mut slot = entry.lock();
        if let Some(env) = *slot {
            return Ok(env);
        }
        let env = load()?;
        self.loads.fetch_add(1, Ordering::SeqCst);
        *slot = Some(env);
        Ok(env)
    }

    /// How many header loads actually happened (≤ distinct fingerprints).
    pub fn header_loads(&self) -> u64 {
        self.loads.load(Ordering::SeqCst)
    }
}
