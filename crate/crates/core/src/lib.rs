//! Correlation clustering on multicore machines.
//!
//! The crate implements KwikCluster driven by a preassigned random order, its
//! two parallel derivatives (C4, which is serializable, and ClusterWild!, which
//! is coordination free), each in bulk-synchronous and asynchronous execution,
//! together with a rejection-sampling baseline (CDK), objective evaluation and
//! a benchmark harness.
//!
//! Graphs are the positive part of a complete signed graph: every stored edge
//! is a `+` similarity and every absent pair is an implicit `-` edge.

pub mod assignment;
pub mod cdk;
pub mod engine;
pub mod error;
pub mod graph;
pub mod harness;
pub mod ordering;
pub mod quality;
pub mod serial;

pub use assignment::{Assignment, CenterFlag};
pub use engine::{EngineConfig, RunReport, Variant};
pub use error::{Error, Result};
pub use graph::Graph;
pub use ordering::{Permutation, Rng};

/// Vertex identifier, `0..n`.
pub type Vertex = u32;

/// Cluster label. For every engine driven by a permutation this is the rank of
/// the cluster center; the value `n` means "unclustered".
pub type Label = u32;
