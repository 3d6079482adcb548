//! Knowledge-navigation engine over scientific concepts.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! - [`taxonomy`]: load the concept DAG, count root-to-concept paths and
//!   classify every concept into a discipline (or mark it
//!   multi-interdisciplinary).
//! - [`corpus`]: turn per-work author records into chronologically ordered
//!   concept trajectories.
//! - [`embed`]: train skip-gram negative-sampling vectors over the
//!   trajectories and answer similarity / neighbor queries.
//! - [`semantics`]: analogy inference, functional-group axes and discipline
//!   propensity checks over a frozen space.
//! - [`navgraph`]: the implicit complete cosine-distance graph, shortest
//!   paths and centrality analytics.

pub mod corpus;
pub mod embed;
pub mod navgraph;
pub mod semantics;
pub mod stats;
pub mod synth;
pub mod taxonomy;
pub mod tsv;

pub use corpus::{CorpusStats, Trajectory, TrajectoryCorpus, WorkRecord};
pub use embed::{EmbeddingSpace, TrainConfig};
pub use navgraph::{NavigationGraph, PathResult};
pub use taxonomy::{Classification, ConceptTaxonomy, DisciplineAssignment, Label};
