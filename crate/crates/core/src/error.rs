use thiserror::Error;

/// Errors produced by the engine, the samplers, and graph I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parallelism must be at least 1")]
    ZeroParallelism,

    #[error("partition count must be at least 1")]
    ZeroPartitions,

    #[error("failed to build worker pool: {0}")]
    WorkerPool(String),

    #[error("sample size must lie in [0, 1], got {0}")]
    SampleSizeOutOfRange(f64),

    #[error("jump probability must lie in [0, 1], got {0}")]
    JumpProbabilityOutOfRange(f64),

    #[error("walker count must be at least 1")]
    ZeroWalkers,

    #[error("walker count {walkers} exceeds vertex count {vertices}")]
    TooManyWalkers { walkers: usize, vertices: usize },

    #[error("operation requires a non-empty vertex set")]
    EmptyGraph,

    #[error("duplicate vertex id {0} in vertex dataset")]
    DuplicateVertexId(u64),

    #[error("edge {edge} references vertex {vertex} absent from the vertex dataset")]
    DanglingEndpoint { edge: u64, vertex: u64 },

    #[error("message addressed to unknown vertex {0}")]
    UnknownMessageTarget(u64),

    #[error("random walk did not converge within {max_supersteps} supersteps ({visited} vertices visited)")]
    WalkNotConverged { max_supersteps: usize, visited: usize },

    #[error("{metric} is undefined: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: String,
    },

    #[error("{path}:{line}: malformed edge list line: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("malformed report: field {field}: {reason}")]
    MalformedReport { field: String, reason: String },

    #[error("invalid synthetic graph spec: {0}")]
    InvalidSyntheticSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
