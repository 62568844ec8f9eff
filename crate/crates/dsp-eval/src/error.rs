use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("benchmark {path}, line {line}: {reason}")]
    MalformedRecord {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("benchmark {path}: duplicate problem id `{id}`")]
    DuplicateId { path: String, id: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
