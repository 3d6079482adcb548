//! Queries that read meaning out of a frozen embedding space: analogy steps
//! along a concept axis, functional-group axes and discipline propensity.

mod analogy;
mod axes;
mod propensity;

use thiserror::Error;

use crate::embed::EmbedError;

pub use analogy::{
    analogy_expand, analogy_infer, analogy_target, analogy_walk, Direction, InferenceEdge, InferenceGraph,
    InferenceNode,
};
pub use axes::{
    axis_projection_report, build_axis, default_groups, resolve_groups, write_distribution_tsv,
    DistributionRow, FunctionalAxis, FunctionalGroup, GroupDef, ProjectionReport,
};
pub use propensity::{propensity_report, PropensityMode, PropensityReport, RadarRow};

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("every concept is excluded; nothing left to return")]
    Exhausted,
    #[error("analogy target vector is zero")]
    ZeroTarget,
    #[error("group `{0}` has no embedded member concepts")]
    EmptyGroup(String),
    #[error("axis from `{from}` to `{to}` has zero length")]
    ZeroAxis { from: String, to: String },
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("group `{group}` names unknown discipline `{discipline}`")]
    UnknownDiscipline { group: String, discipline: String },
    #[error("no discipline root is embedded")]
    NoRoots,
    #[error("bad groups config: {0}")]
    Config(#[from] serde_json::Error),
}
