use serde::{Deserialize, Serialize};

use crate::CoreError;

/// A benchmark problem: the import/open preamble, the formal statement text
/// (ending in `:= by` or equivalent), and optional informal companions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalStatement {
    /// Unique id within a benchmark set, e.g. `imo_2019_p1`.
    pub id: String,
    /// Import/open preamble. May be empty.
    #[serde(default)]
    pub header: String,
    /// The theorem text itself.
    pub statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informal_statement: Option<String>,
    /// Carried but unused by default; the informal-proof toggle feeds it to
    /// the draft prompt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informal_proof: Option<String>,
    /// Benchmark tag this problem came from.
    #[serde(default)]
    pub source: String,
}

impl FormalStatement {
    pub fn new(id: impl Into<String>, header: impl Into<String>, statement: impl Into<String>) -> Self {
        FormalStatement {
            id: id.into(),
            header: header.into(),
            statement: statement.into(),
            informal_statement: None,
            informal_proof: None,
            source: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.id.is_empty() {
            return Err(CoreError::invalid("statement", "empty id"));
        }
        if self.statement.trim().is_empty() {
            return Err(CoreError::invalid("statement", format!("{}: empty statement text", self.id)));
        }
        Ok(())
    }
}
