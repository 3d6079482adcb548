//! Request handling independent of HTTP. The CLI calls the same functions so
//! both paths give identical answers.

use std::collections::HashSet;

use sciconnav_core::embed::{EmbedError, EmbeddingSpace, Query};
use sciconnav_core::navgraph::{centrality_odds_table, Exactness, Measure, NavError, OddsRow, WeightedGraph};
use sciconnav_core::semantics::{
    analogy_expand, analogy_walk, axis_projection_report, Direction, InferenceEdge, InferenceGraph, InferenceNode,
    ProjectionReport, SemanticsError,
};
use sciconnav_core::DisciplineAssignment;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::ApiError;

pub const SEARCH_LIMIT: usize = 50;
pub const MAX_NEIGHBORS: usize = 1000;
pub const MAX_STEPS: usize = 12;
pub const DEFAULT_ODDS_KS: [usize; 5] = [200, 500, 1000, 1500, 2000];

impl From<EmbedError> for ApiError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::UnknownConcept(_) => ApiError::unknown_concept(e.to_string()),
            EmbedError::BadQuery => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<SemanticsError> for ApiError {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::Embed(inner) => inner.into(),
            SemanticsError::ZeroTarget | SemanticsError::ZeroAxis { .. } | SemanticsError::EmptyGroup(_) => {
                ApiError::degenerate_axis(e.to_string())
            }
            SemanticsError::Exhausted => ApiError::bad_request(e.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<NavError> for ApiError {
    fn from(e: NavError) -> Self {
        match e {
            NavError::UnknownNode(_) => ApiError::unknown_concept(e.to_string()),
            NavError::Embed(inner) => inner.into(),
            other => ApiError::internal(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptHit {
    pub id: String,
    pub name: String,
    pub level: u8,
    pub works_count: u64,
}

/// Case-insensitive match on display names: prefix matches first, then
/// substring matches, each by descending works count then id.
pub fn search_concepts(b: &Bundle, q: &str) -> Result<Vec<ConceptHit>, ApiError> {
    let needle = q.trim().to_lowercase();
    if needle.is_empty() {
        return Err(ApiError::bad_request("query parameter `q` must be non-empty"));
    }
    let mut hits: Vec<(bool, &sciconnav_core::taxonomy::Concept)> = b
        .taxonomy
        .concepts()
        .filter_map(|c| {
            let name = c.name.to_lowercase();
            if name.starts_with(&needle) {
                Some((true, c))
            } else if name.contains(&needle) {
                Some((false, c))
            } else {
                None
            }
        })
        .collect();
    hits.sort_by(|(pa, a), (pb, b)| {
        pb.cmp(pa)
            .then(b.works_count.cmp(&a.works_count))
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok(hits
        .into_iter()
        .take(SEARCH_LIMIT)
        .map(|(_, c)| ConceptHit {
            id: c.id.clone(),
            name: c.name.clone(),
            level: c.level,
            works_count: c.works_count,
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConceptDetail<'a> {
    pub id: &'a str,
    pub name: &'a str,
    pub level: u8,
    pub works_count: u64,
    pub embedded: bool,
    pub in_graph: bool,
    pub label: Option<&'a str>,
    pub tag: Option<&'static str>,
    pub assignment: Option<&'a DisciplineAssignment>,
}

pub fn concept_detail<'a>(b: &'a Bundle, id: &str) -> Result<ConceptDetail<'a>, ApiError> {
    let c = b
        .taxonomy
        .concept(id)
        .ok_or_else(|| ApiError::unknown_concept(format!("unknown concept `{id}`")))?;
    let assignment = b.classification.get(id);
    Ok(ConceptDetail {
        id: &c.id,
        name: &c.name,
        level: c.level,
        works_count: c.works_count,
        embedded: b.space.contains(id),
        in_graph: b.graph.node_index(id).is_ok(),
        label: assignment.map(|a| a.label.as_str()),
        tag: assignment.map(|a| a.tag()),
        assignment,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborHit {
    pub id: String,
    pub name: Option<String>,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborsResponse {
    pub id: String,
    pub k: usize,
    pub neighbors: Vec<NeighborHit>,
}

fn display_name(b: &Bundle, id: &str) -> Option<String> {
    b.taxonomy.concept(id).map(|c| c.name.clone())
}

/// The `k` most similar concepts, the query itself excluded.
pub fn neighbors(b: &Bundle, id: &str, k: usize) -> Result<NeighborsResponse, ApiError> {
    if k > MAX_NEIGHBORS {
        return Err(ApiError::bad_request(format!("k must be at most {MAX_NEIGHBORS}")));
    }
    let exclude = HashSet::from([id.to_string()]);
    let found = b.space.nearest_neighbors(Query::Concept(id), k, &exclude)?;
    Ok(NeighborsResponse {
        id: id.to_string(),
        k,
        neighbors: found
            .into_iter()
            .map(|n| NeighborHit {
                name: display_name(b, &n.id),
                id: n.id,
                similarity: n.similarity,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyRequest {
    pub seed: String,
    pub axis_from: String,
    pub axis_to: String,
    /// `+`, `-` or `both`.
    #[serde(default = "default_direction")]
    pub direction: String,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_direction() -> String {
    "+".into()
}

fn default_steps() -> usize {
    1
}

/// A one-direction request walks `steps` times from the seed and returns the
/// chain. `both` expands breadth-first in both directions to depth `steps`.
pub fn run_analogy(b: &Bundle, req: &AnalogyRequest) -> Result<InferenceGraph, ApiError> {
    analogy_graph(&b.space, req)
}

pub fn analogy_graph(space: &EmbeddingSpace, req: &AnalogyRequest) -> Result<InferenceGraph, ApiError> {
    if req.steps > MAX_STEPS {
        return Err(ApiError::bad_request(format!("steps must be at most {MAX_STEPS}")));
    }
    for id in [&req.seed, &req.axis_from, &req.axis_to] {
        space.index_of(id)?;
    }
    if req.direction == "both" {
        return Ok(analogy_expand(space, &req.seed, &req.axis_from, &req.axis_to, req.steps)?);
    }
    let direction: Direction = req.direction.parse().map_err(ApiError::bad_request)?;
    let walk = analogy_walk(space, &req.seed, &req.axis_from, &req.axis_to, direction, req.steps)?;
    let mut graph = InferenceGraph {
        seed: req.seed.clone(),
        axis_from: req.axis_from.clone(),
        axis_to: req.axis_to.clone(),
        depth: req.steps,
        nodes: vec![InferenceNode {
            id: req.seed.clone(),
            depth: 0,
        }],
        edges: Vec::with_capacity(walk.len()),
    };
    let mut prev = req.seed.clone();
    for (i, n) in walk.into_iter().enumerate() {
        graph.edges.push(InferenceEdge {
            from: prev,
            to: n.id.clone(),
            direction,
            similarity: n.similarity,
        });
        graph.nodes.push(InferenceNode {
            id: n.id.clone(),
            depth: i + 1,
        });
        prev = n.id;
    }
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRequest {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResponse {
    pub source: String,
    pub target: String,
    pub nodes: Vec<String>,
    pub distance: f64,
    pub steps: usize,
    /// Weight of each hop, in path order.
    pub edge_weights: Vec<f64>,
}

pub fn shortest_path(b: &Bundle, req: &PathRequest) -> Result<PathResponse, ApiError> {
    let p = b.graph.shortest_path(&req.source, &req.target)?;
    let idx: Vec<usize> = p
        .nodes
        .iter()
        .map(|id| b.graph.node_index(id))
        .collect::<Result<_, _>>()?;
    let edge_weights = idx.windows(2).map(|w| b.graph.weight(w[0], w[1])).collect();
    Ok(PathResponse {
        source: p.source,
        target: p.target,
        nodes: p.nodes,
        distance: p.distance,
        steps: p.steps,
        edge_weights,
    })
}

pub fn parse_measure(s: Option<&str>) -> Result<Measure, ApiError> {
    s.unwrap_or("closeness").parse().map_err(ApiError::bad_request)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedConcept {
    pub rank: usize,
    pub id: String,
    pub name: Option<String>,
    pub score: f64,
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityResponse {
    pub measure: Measure,
    pub exactness: Exactness,
    pub nodes: usize,
    pub top: Vec<RankedConcept>,
}

pub fn centrality(b: &Bundle, measure: Measure, k: usize) -> Result<CentralityResponse, ApiError> {
    let report = b.centrality(measure).map_err(ApiError::internal)?;
    let top = report
        .ranking
        .iter()
        .take(k)
        .enumerate()
        .map(|(r, &i)| {
            let id = &report.ids[i];
            RankedConcept {
                rank: r + 1,
                id: id.clone(),
                name: display_name(b, id),
                score: report.scores[i],
                tag: b.classification.get(id).map(|a| a.tag().to_string()),
            }
        })
        .collect();
    Ok(CentralityResponse {
        measure,
        exactness: report.exactness,
        nodes: report.ids.len(),
        top,
    })
}

pub fn parse_ks(s: Option<&str>) -> Result<Vec<usize>, ApiError> {
    let Some(s) = s else {
        return Ok(DEFAULT_ODDS_KS.to_vec());
    };
    let ks: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| ApiError::bad_request(format!("ks must be comma-separated positive integers, got `{s}`")))?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(ApiError::bad_request("ks must be positive"));
    }
    Ok(ks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsResponse {
    pub measure: Measure,
    pub exactness: Exactness,
    pub rows: Vec<OddsRow>,
}

pub fn odds(b: &Bundle, measure: Measure, ks: &[usize]) -> Result<OddsResponse, ApiError> {
    let report = b.centrality(measure).map_err(ApiError::internal)?;
    Ok(OddsResponse {
        measure,
        exactness: report.exactness,
        rows: centrality_odds_table(report, &b.classification, ks),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub name: String,
    pub from_group: String,
    pub to_group: String,
    /// Why the axis cannot be used, if it cannot.
    pub degenerate: Option<String>,
}

pub fn list_axes(b: &Bundle) -> Vec<AxisInfo> {
    b.axes
        .values()
        .map(|a| AxisInfo {
            name: a.name.clone(),
            from_group: a.from_group.clone(),
            to_group: a.to_group.clone(),
            degenerate: a.axis.as_ref().err().cloned(),
        })
        .collect()
}

/// Projection distributions for a named axis, optionally restricted to one
/// discipline given by root id or display name.
pub fn projection(b: &Bundle, name: &str, discipline: Option<&str>) -> Result<ProjectionReport, ApiError> {
    let entry = b
        .axes
        .get(name)
        .ok_or_else(|| ApiError::bad_request(format!("unknown axis `{name}`")))?;
    let axis = entry.axis.as_ref().map_err(|e| ApiError::degenerate_axis(e.clone()))?;
    let mut report = axis_projection_report(&b.space, &b.classification, axis)?;
    if let Some(key) = discipline {
        let root = b
            .taxonomy
            .resolve_root(key)
            .ok_or_else(|| ApiError::bad_request(format!("unknown discipline `{key}`")))?;
        report.rows.retain(|r| r.discipline == root.id);
    }
    Ok(report)
}
