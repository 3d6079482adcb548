use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{NavError, WeightedGraph};
use crate::taxonomy::Classification;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub source: String,
    pub target: String,
    pub nodes: Vec<String>,
    pub distance: f64,
    pub steps: usize,
}

/// Single-source result of the dense Dijkstra.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: usize,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Node indices from the source to `t`, or `None` when `t` was not
    /// reached.
    pub fn path_to(&self, t: usize) -> Option<Vec<usize>> {
        if !self.dist[t].is_finite() {
            return None;
        }
        let mut path = vec![t];
        let mut cur = t;
        while let Some(p) = self.pred[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        Some(path)
    }

    pub fn steps_to(&self, t: usize) -> Option<usize> {
        if !self.dist[t].is_finite() {
            return None;
        }
        let mut steps = 0;
        let mut cur = t;
        while let Some(p) = self.pred[cur] {
            steps += 1;
            cur = p;
        }
        Some(steps)
    }
}

/// O(n^2) Dijkstra without a heap. Among equal-distance predecessors the one
/// with the smaller id wins. With `target`, stops once it is settled.
pub fn dijkstra<G: WeightedGraph + ?Sized>(g: &G, source: usize, target: Option<usize>) -> ShortestPaths {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut buf = Vec::new();
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        if Some(u) == target {
            break;
        }
        let row = g.weight_row(u, &mut buf);
        for v in 0..n {
            if done[v] {
                continue;
            }
            let nd = best + row[v];
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(u);
            } else if nd == dist[v] && nd.is_finite() {
                if let Some(p) = pred[v] {
                    if g.node_id(u) < g.node_id(p) {
                        pred[v] = Some(u);
                    }
                }
            }
        }
    }
    ShortestPaths { source, dist, pred }
}

pub fn shortest_path<G: WeightedGraph + ?Sized>(g: &G, source: &str, target: &str) -> Result<PathResult, NavError> {
    let s = g.node_index(source)?;
    let t = g.node_index(target)?;
    let sp = dijkstra(g, s, Some(t));
    let nodes = sp
        .path_to(t)
        .ok_or_else(|| NavError::UnknownNode(target.to_string()))?
        .into_iter()
        .map(|i| g.node_id(i).to_string())
        .collect::<Vec<_>>();
    Ok(PathResult {
        source: source.to_string(),
        target: target.to_string(),
        steps: nodes.len() - 1,
        nodes,
        distance: sp.dist[t],
    })
}

/// `count` ordered pairs with distinct endpoints, drawn uniformly.
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = rng.random_range(0..n);
            let mut t = rng.random_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            (s, t)
        })
        .collect()
}

/// Every ordered pair of distinct nodes.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|s| (0..n).filter(move |&t| t != s).map(move |t| (s, t)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPath {
    pub source: usize,
    pub target: usize,
    pub distance: f64,
    pub steps: usize,
}

/// Shortest distance and step count for each pair. Pairs sharing a source
/// share one Dijkstra run.
pub fn pair_paths<G: WeightedGraph + ?Sized>(g: &G, pairs: &[(usize, usize)]) -> Vec<PairPath> {
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &(s, _)) in pairs.iter().enumerate() {
        by_source.entry(s).or_default().push(k);
    }
    let groups: Vec<(usize, Vec<usize>)> = by_source.into_iter().collect();
    let solved: Vec<Vec<(usize, PairPath)>> = groups
        .par_iter()
        .map(|(s, members)| {
            let sp = dijkstra(g, *s, None);
            members
                .iter()
                .map(|&k| {
                    let t = pairs[k].1;
                    (
                        k,
                        PairPath {
                            source: *s,
                            target: t,
                            distance: sp.dist[t],
                            steps: sp.steps_to(t).unwrap_or(0),
                        },
                    )
                })
                .collect()
        })
        .collect();
    let mut out: Vec<Option<PairPath>> = vec![None; pairs.len()];
    for (k, p) in solved.into_iter().flatten() {
        out[k] = Some(p);
    }
    out.into_iter().map(|p| p.expect("every pair solved")).collect()
}

/// Counts of shortest-path step lengths.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepHistogram {
    pub counts: BTreeMap<usize, u64>,
}

impl StepHistogram {
    pub fn add(&mut self, steps: usize) {
        *self.counts.entry(steps).or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Share of paths with fewer than `steps` steps.
    pub fn fraction_below(&self, steps: usize) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.counts.range(..steps).map(|(_, c)| c).sum::<u64>() as f64 / total as f64
    }
}

pub fn step_size_histogram<G: WeightedGraph + ?Sized>(g: &G, pairs: &[(usize, usize)]) -> StepHistogram {
    let mut h = StepHistogram::default();
    for p in pair_paths(g, pairs) {
        h.add(p.steps);
    }
    h
}

/// Step histograms and shortest distances keyed by the source concept's
/// label. Sources without an assignment go under `unclassified`.
pub fn step_histogram_by_discipline<G: WeightedGraph + ?Sized>(
    g: &G,
    pairs: &[(usize, usize)],
    classification: &Classification,
) -> BTreeMap<String, (StepHistogram, Vec<f64>)> {
    let mut labels: HashMap<usize, String> = HashMap::new();
    let mut out: BTreeMap<String, (StepHistogram, Vec<f64>)> = BTreeMap::new();
    for p in pair_paths(g, pairs) {
        let label = labels.entry(p.source).or_insert_with(|| {
            classification
                .get(g.node_id(p.source))
                .map(|a| a.label.as_str().to_string())
                .unwrap_or_else(|| "unclassified".to_string())
        });
        let entry = out.entry(label.clone()).or_default();
        entry.0.add(p.steps);
        entry.1.push(p.distance);
    }
    out
}

/// Draws `count` pairs, or enumerates every ordered pair when `count` is
/// `None`.
pub fn pairs_for(n: usize, count: Option<usize>, seed: u64) -> Vec<(usize, usize)> {
    match count {
        Some(c) => sample_pairs(n, c, seed),
        None => all_pairs(n),
    }
}

/// Distinct source nodes drawn without replacement.
pub(crate) fn sample_sources(n: usize, p: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = sample(&mut rng, n, p).into_vec();
    v.sort_unstable();
    v
}

pub fn write_histogram_tsv<W: Write>(h: &StepHistogram, mut out: W) -> std::io::Result<()> {
    writeln!(out, "steps\tcount")?;
    for (steps, count) in &h.counts {
        writeln!(out, "{steps}\t{count}")?;
    }
    out.flush()
}
