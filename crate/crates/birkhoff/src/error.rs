use std::path::PathBuf;

/// Errors shared across the sampling, statistics, and volume modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },

    #[error("matrix state corrupted: {0}")]
    CorruptedState(String),

    #[error("sinkhorn repair did not converge in {iters} iterations (final violation {violation:.3e})")]
    SinkhornDiverged { iters: usize, violation: f64 },

    #[error("rejection sampler accepted nothing after {proposals} proposals")]
    ZeroAcceptance { proposals: u64 },

    #[error("n = {n} exceeds the supported bound {max} for {what}")]
    TooLarge { n: usize, max: usize, what: &'static str },

    #[error("gibbs move {move_index} failed: {source}")]
    ChainStep {
        move_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("svd failed to converge on an n = {n} matrix")]
    SvdFailure { n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("bad magic in {path}: expected \"BDSM1\"")]
    BadMagic { path: PathBuf },

    #[error("truncated batch file {path}: expected {expected} bytes of payload, found {actual}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("malformed batch header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
