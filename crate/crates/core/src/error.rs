use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {0} not found")]
    NodeNotFound(u32),

    #[error("label {0:?} not found")]
    LabelNotFound(String),

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("self-loop on node {0}")]
    SelfLoop(u32),

    #[error("range error: {0}")]
    Range(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("modularity undefined: total edge weight is zero")]
    UndefinedModularity,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("accuracy undefined: no original activations in the scored window")]
    UndefinedAccuracy,

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub fn shape(expected: impl core::fmt::Display, actual: impl core::fmt::Display) -> Self {
        use alloc::string::ToString;
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
