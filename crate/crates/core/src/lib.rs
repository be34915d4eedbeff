//! Associative memory over temporal graphs.
//!
//! A [`TemporalGraph`] is an undirected graph whose nodes carry hourly
//! activity counts. The pipeline implemented here:
//!
//! 1. keep nodes that burst ([`preprocess`]),
//! 2. learn edge weights from per-hour co-activation, restricted to the
//!    edges that already exist ([`hebbian`]),
//! 3. prune zero-weight edges and small components ([`graph`]),
//! 4. extract clusters by modularity optimization ([`community`]),
//! 5. recall full activity patterns from masked inputs with a synchronous
//!    Hopfield iteration ([`hopfield`], [`recall_eval`]).
//!
//! [`synth`] generates planted-cluster graphs with ground truth and
//! [`stats`] covers degree/weight distributions and power-law fits.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled,
//! which adds thread-parallel variants of learning and recall.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod community;
mod error;
pub mod graph;
pub mod hebbian;
pub mod hopfield;
pub mod preprocess;
pub mod recall_eval;
pub mod stats;
pub mod synth;

pub(crate) mod exact;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use community::{louvain, modularity, Partition};
pub use error::{Error, Result};
pub use graph::{
    GraphBuilder, HourStamp, IdMapping, NodeId, TemporalGraph, TimeSeries, TimeWindow,
};
pub use hebbian::{learn, LearnConfig};
pub use hopfield::{recall, recall_step, Pattern, RecallConfig, RecallResult};
pub use preprocess::BurstConfig;
pub use recall_eval::{EvalConfig, EvalReport};
pub use synth::{GroundTruth, SynthConfig};
