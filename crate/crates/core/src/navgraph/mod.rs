//! The navigation graph: every pair of selected concepts is joined by an edge
//! of weight `1 - cosine similarity`. Edges are never stored as a list; rows
//! of the weight matrix are computed from unit vectors on demand, or read
//! from an optional dense cache when the graph is small.

mod centrality;
mod paths;

use std::collections::HashMap;

use thiserror::Error;

use crate::embed::{dot, EmbedError, EmbeddingSpace};
use crate::taxonomy::ConceptTaxonomy;

pub use centrality::{
    avg_sd, betweenness_centrality, centrality_odds_table, closeness_centrality, hl_avgsd_report,
    write_centrality_tsv, write_odds_tsv, BetweennessMode, CentralityReport, Exactness, HlReport, Measure,
    OddsRow,
};
pub use paths::{
    all_pairs, dijkstra, pair_paths, pairs_for, sample_pairs, shortest_path, step_histogram_by_discipline, step_size_histogram,
    write_histogram_tsv, PairPath, PathResult, ShortestPaths, StepHistogram,
};

/// Largest node count for which [`NavigationGraph::build`] materializes the
/// dense weight matrix by default (8 bytes per entry).
pub const DEFAULT_CACHE_LIMIT: usize = 2048;

#[derive(Debug, Error)]
pub enum NavError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("requested {requested} nodes but only {available} concepts are both retained and embedded")]
    Insufficient { requested: usize, available: usize },
    #[error("smallest selected works_count is {selected}, below the required {required}")]
    MinWorks { selected: u64, required: u64 },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("graph needs at least {needed} nodes, has {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error("pivot count {pivots} must be between 1 and the node count {nodes}")]
    BadPivots { pivots: usize, nodes: usize },
    #[error("reachable set is empty")]
    EmptyReachable,
    #[error("H/L split needs 2k <= n (k = {k}, n = {n})")]
    HlTooLarge { k: usize, n: usize },
    #[error("weight matrix must be square with {n}x{n} entries, got {got}")]
    BadMatrix { n: usize, got: usize },
    #[error("negative or NaN edge weight between `{0}` and `{1}`")]
    BadWeight(String, String),
}

/// A complete (or dense) weighted graph exposed row by row.
pub trait WeightedGraph: Sync {
    fn node_count(&self) -> usize;

    fn node_id(&self, i: usize) -> &str;

    fn node_index(&self, id: &str) -> Result<usize, NavError>;

    fn weight(&self, i: usize, j: usize) -> f64;

    /// Row `i` of the weight matrix. `buf` is scratch space for graphs that
    /// compute rows on the fly.
    fn weight_row<'a>(&'a self, i: usize, buf: &'a mut Vec<f64>) -> &'a [f64];
}

/// An explicit weight matrix. `f64::INFINITY` marks a missing edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    weights: Vec<f64>,
}

impl DenseGraph {
    pub fn new(ids: Vec<String>, weights: Vec<f64>) -> Result<Self, NavError> {
        let n = ids.len();
        if weights.len() != n * n {
            return Err(NavError::BadMatrix { n, got: weights.len() });
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if w.is_nan() || w < 0.0 {
                    return Err(NavError::BadWeight(ids[i].clone(), ids[j].clone()));
                }
            }
        }
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(DenseGraph { ids, index, weights })
    }

    /// Nodes named `n0, n1, ...` (zero-padded so names sort like indices).
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self, NavError> {
        let width = n.max(2).saturating_sub(1).to_string().len();
        let ids = (0..n).map(|i| format!("n{i:0width$}")).collect();
        Self::new(ids, weights)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

impl WeightedGraph for DenseGraph {
    fn node_count(&self) -> usize {
        self.ids.len()
    }

    fn node_id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    fn node_index(&self, id: &str) -> Result<usize, NavError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| NavError::UnknownNode(id.to_string()))
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.ids.len() + j]
    }

    fn weight_row<'a>(&'a self, i: usize, _buf: &'a mut Vec<f64>) -> &'a [f64] {
        let n = self.ids.len();
        &self.weights[i * n..(i + 1) * n]
    }
}

/// Complete graph over selected concepts with `w_ij = 1 - s_ij`.
#[derive(Debug, Clone)]
pub struct NavigationGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    works: Vec<u64>,
    dim: usize,
    unit: Vec<f64>,
    cache: Option<Vec<f64>>,
}

impl NavigationGraph {
    /// The `top_n` retained, embedded concepts with the most works (ties by
    /// id). With `min_works`, the least-cited selected concept must reach it.
    pub fn build(
        space: &EmbeddingSpace,
        taxonomy: &ConceptTaxonomy,
        top_n: usize,
        min_works: Option<u64>,
    ) -> Result<Self, NavError> {
        let mut candidates: Vec<(&str, u64)> = taxonomy
            .concepts()
            .filter(|c| space.contains(&c.id))
            .map(|c| (c.id.as_str(), c.works_count))
            .collect();
        if top_n == 0 {
            return Err(NavError::TooFewNodes { needed: 1, got: 0 });
        }
        if candidates.len() < top_n {
            return Err(NavError::Insufficient {
                requested: top_n,
                available: candidates.len(),
            });
        }
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        candidates.truncate(top_n);
        let smallest = candidates.last().map(|c| c.1).unwrap_or(0);
        if let Some(required) = min_works {
            if smallest < required {
                return Err(NavError::MinWorks {
                    selected: smallest,
                    required,
                });
            }
        }
        let ids: Vec<String> = candidates.iter().map(|c| c.0.to_string()).collect();
        let works = candidates.iter().map(|c| c.1).collect();
        let mut g = Self::assemble(space, ids, works)?;
        if g.len() <= DEFAULT_CACHE_LIMIT {
            g = g.with_weight_cache();
        }
        Ok(g)
    }

    /// A graph over the given embedded concepts, in the given order. No
    /// weight cache is built.
    pub fn from_space(space: &EmbeddingSpace, ids: &[String]) -> Result<Self, NavError> {
        Self::assemble(space, ids.to_vec(), vec![0; ids.len()])
    }

    /// A graph over the whole vocabulary.
    pub fn from_whole_space(space: &EmbeddingSpace) -> Result<Self, NavError> {
        Self::from_space(space, space.vocab())
    }

    fn assemble(space: &EmbeddingSpace, ids: Vec<String>, works: Vec<u64>) -> Result<Self, NavError> {
        let dim = space.dim();
        let mut unit = Vec::with_capacity(ids.len() * dim);
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            let idx = space.index_of(id)?;
            unit.extend_from_slice(space.unit_row(idx));
            index.insert(id.clone(), i);
        }
        Ok(NavigationGraph {
            ids,
            index,
            works,
            dim,
            unit,
            cache: None,
        })
    }

    /// Materializes the full `n x n` weight matrix.
    pub fn with_weight_cache(mut self) -> Self {
        let n = self.len();
        let mut cache = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.compute_weight(i, j);
                cache[i * n + j] = w;
                cache[j * n + i] = w;
            }
        }
        self.cache = Some(cache);
        self
    }

    pub fn without_weight_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn has_weight_cache(&self) -> bool {
        self.cache.is_some()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn works_count(&self, i: usize) -> u64 {
        self.works[i]
    }

    pub fn min_works(&self) -> Option<u64> {
        self.works.iter().copied().min()
    }

    fn unit_row(&self, i: usize) -> &[f64] {
        &self.unit[i * self.dim..(i + 1) * self.dim]
    }

    fn compute_weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        1.0 - dot(self.unit_row(i), self.unit_row(j)).clamp(-1.0, 1.0)
    }

    pub fn shortest_path(&self, source: &str, target: &str) -> Result<PathResult, NavError> {
        shortest_path(self, source, target)
    }
}

impl WeightedGraph for NavigationGraph {
    fn node_count(&self) -> usize {
        self.ids.len()
    }

    fn node_id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    fn node_index(&self, id: &str) -> Result<usize, NavError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| NavError::UnknownNode(id.to_string()))
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        match &self.cache {
            Some(c) => c[i * self.ids.len() + j],
            None => self.compute_weight(i, j),
        }
    }

    fn weight_row<'a>(&'a self, i: usize, buf: &'a mut Vec<f64>) -> &'a [f64] {
        let n = self.ids.len();
        if let Some(c) = &self.cache {
            return &c[i * n..(i + 1) * n];
        }
        buf.clear();
        let ui = self.unit_row(i);
        buf.extend((0..n).map(|j| {
            if j == i {
                0.0
            } else {
                1.0 - dot(ui, self.unit_row(j)).clamp(-1.0, 1.0)
            }
        }));
        buf
    }
}
