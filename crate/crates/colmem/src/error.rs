use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{what}, line {line}: {msg}")]
    Format {
        what: &'static str,
        line: u64,
        msg: String,
    },
    #[error("{what}: {malformed} of {total} lines malformed")]
    TooManyMalformed {
        what: &'static str,
        malformed: u64,
        total: u64,
    },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] colmem_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn format(what: &'static str, line: u64, msg: impl Into<String>) -> Error {
        Error::Format {
            what,
            line,
            msg: msg.into(),
        }
    }
}

/// Pipeline stage, also the prefix of every stage failure and its exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Synth,
    Ingest,
    Preprocess,
    Learn,
    Prune,
    Communities,
    Stats,
    Recall,
    Eval,
    Export,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Preprocess => "preprocess",
            Stage::Learn => "learn",
            Stage::Prune => "prune",
            Stage::Communities => "communities",
            Stage::Stats => "stats",
            Stage::Recall => "recall",
            Stage::Eval => "eval",
            Stage::Export => "export",
        }
    }

    /// Process exit code; 2 is left to argument parsing.
    pub fn exit_code(self) -> u8 {
        match self {
            Stage::Config => 3,
            Stage::Synth => 10,
            Stage::Ingest => 11,
            Stage::Preprocess => 12,
            Stage::Learn => 13,
            Stage::Prune => 14,
            Stage::Communities => 15,
            Stage::Stats => 16,
            Stage::Recall => 17,
            Stage::Eval => 18,
            Stage::Export => 19,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T, E: Into<Error>> AtStage<T> for std::result::Result<T, E> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}
