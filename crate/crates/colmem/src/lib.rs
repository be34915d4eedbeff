//! File formats, snapshots, configuration and the pipeline driver around
//! `colmem-core`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod gexf;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod snapshot;

pub use error::{Error, Result, Stage, StageError};
