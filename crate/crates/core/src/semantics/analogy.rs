use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SemanticsError;
use crate::embed::{EmbedError, EmbeddingSpace, Neighbor, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::Positive => "+",
            Direction::Negative => "-",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" | "pos" | "positive" => Ok(Direction::Positive),
            "-" | "neg" | "negative" => Ok(Direction::Negative),
            other => Err(format!("direction must be + or -, got `{other}`")),
        }
    }
}

/// `v_a ± (v_d - v_c)` on the raw vectors.
pub fn analogy_target(
    space: &EmbeddingSpace,
    a: &str,
    c: &str,
    d: &str,
    direction: Direction,
) -> Result<Vec<f64>, EmbedError> {
    let va = space.vector(a)?;
    let vc = space.vector(c)?;
    let vd = space.vector(d)?;
    let sign = direction.sign();
    Ok(va
        .iter()
        .zip(vc.iter().zip(vd))
        .map(|(&x, (&from, &to))| x + sign * (to - from))
        .collect())
}

/// The concept whose vector is most cosine-similar to `v_a ± (v_d - v_c)`,
/// never `a`, `c`, `d` or anything in `exclude`.
pub fn analogy_infer(
    space: &EmbeddingSpace,
    a: &str,
    c: &str,
    d: &str,
    direction: Direction,
    exclude: &HashSet<String>,
) -> Result<Neighbor, SemanticsError> {
    let target = analogy_target(space, a, c, d, direction)?;
    let mut excluded = exclude.clone();
    excluded.extend([a.to_string(), c.to_string(), d.to_string()]);
    let found = match space.nearest_neighbors(Query::Vector(&target), 1, &excluded) {
        Ok(found) => found,
        Err(EmbedError::BadQuery) => return Err(SemanticsError::ZeroTarget),
        Err(e) => return Err(e.into()),
    };
    found.into_iter().next().ok_or(SemanticsError::Exhausted)
}

/// Repeated steps in one direction, each starting from the previous result.
/// Concepts already on the walk are excluded from later steps.
pub fn analogy_walk(
    space: &EmbeddingSpace,
    seed: &str,
    c: &str,
    d: &str,
    direction: Direction,
    steps: usize,
) -> Result<Vec<Neighbor>, SemanticsError> {
    space.index_of(seed)?;
    let mut visited = HashSet::from([seed.to_string()]);
    let mut current = seed.to_string();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = analogy_infer(space, &current, c, d, direction, &visited)?;
        visited.insert(next.id.clone());
        current = next.id.clone();
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceNode {
    pub id: String,
    /// Depth at which the concept was first reached.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceEdge {
    pub from: String,
    pub to: String,
    pub direction: Direction,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceGraph {
    pub seed: String,
    pub axis_from: String,
    pub axis_to: String,
    pub depth: usize,
    pub nodes: Vec<InferenceNode>,
    pub edges: Vec<InferenceEdge>,
}

/// Breadth-first expansion: every frontier node takes one step in each
/// direction. A concept reached twice keeps a single node and is expanded
/// only from its first depth.
pub fn analogy_expand(
    space: &EmbeddingSpace,
    seed: &str,
    c: &str,
    d: &str,
    depth: usize,
) -> Result<InferenceGraph, SemanticsError> {
    space.index_of(seed)?;
    space.index_of(c)?;
    space.index_of(d)?;
    let mut graph = InferenceGraph {
        seed: seed.to_string(),
        axis_from: c.to_string(),
        axis_to: d.to_string(),
        depth,
        nodes: vec![InferenceNode {
            id: seed.to_string(),
            depth: 0,
        }],
        edges: Vec::new(),
    };
    let mut seen: HashMap<String, usize> = HashMap::from([(seed.to_string(), 0)]);
    let none = HashSet::new();
    let mut frontier = vec![seed.to_string()];
    for t in 1..=depth {
        let mut next = Vec::new();
        for node in &frontier {
            for direction in [Direction::Positive, Direction::Negative] {
                let hit = analogy_infer(space, node, c, d, direction, &none)?;
                if !seen.contains_key(&hit.id) {
                    seen.insert(hit.id.clone(), graph.nodes.len());
                    graph.nodes.push(InferenceNode {
                        id: hit.id.clone(),
                        depth: t,
                    });
                    next.push(hit.id.clone());
                }
                graph.edges.push(InferenceEdge {
                    from: node.clone(),
                    to: hit.id,
                    direction,
                    similarity: hit.similarity,
                });
            }
        }
        frontier = next;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> EmbeddingSpace {
        EmbeddingSpace::from_rows(vec![
            ("a".into(), vec![1.0, 0.0, 0.0]),
            ("c".into(), vec![0.0, 1.0, 0.0]),
            ("d".into(), vec![0.0, 0.0, 1.0]),
            ("ad".into(), vec![1.0, -0.9, 1.0]),
            ("ac".into(), vec![1.0, 1.0, -0.9]),
            ("near_a".into(), vec![1.0, 0.1, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn positive_and_negative_steps() {
        let s = space();
        let none = HashSet::new();
        assert_eq!(analogy_infer(&s, "a", "c", "d", Direction::Positive, &none).unwrap().id, "ad");
        assert_eq!(analogy_infer(&s, "a", "c", "d", Direction::Negative, &none).unwrap().id, "ac");
    }

    #[test]
    fn zero_axis_gives_nearest_neighbor_of_seed() {
        let s = space();
        let hit = analogy_infer(&s, "a", "c", "c", Direction::Positive, &HashSet::new()).unwrap();
        assert_eq!(hit.id, "near_a");
    }

    #[test]
    fn exhausted_vocabulary_errors() {
        let s = space();
        let all: HashSet<String> = s.vocab().iter().cloned().collect();
        assert!(matches!(
            analogy_infer(&s, "a", "c", "d", Direction::Positive, &all),
            Err(SemanticsError::Exhausted)
        ));
    }

    #[test]
    fn depth_zero_is_bare_seed() {
        let g = analogy_expand(&space(), "a", "c", "d", 0).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn expansion_respects_counting_bound() {
        let g = analogy_expand(&space(), "a", "c", "d", 2).unwrap();
        assert!(g.nodes.len() <= 7);
        assert_eq!(g.nodes.iter().filter(|n| n.depth == 0).count(), 1);
        assert!(g.nodes.iter().all(|n| n.depth <= 2));
        let first: Vec<_> = g.edges.iter().filter(|e| e.from == "a").collect();
        assert_eq!(first.len(), 2);
    }

    #[test]
    fn walk_does_not_revisit() {
        let w = analogy_walk(&space(), "a", "c", "d", Direction::Positive, 3).unwrap();
        let ids: HashSet<_> = w.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids.len(), 3);
        assert!(!ids.contains("a"));
    }

    #[test]
    fn direction_parses() {
        assert_eq!("+".parse::<Direction>().unwrap(), Direction::Positive);
        assert_eq!("neg".parse::<Direction>().unwrap(), Direction::Negative);
        assert!("x".parse::<Direction>().is_err());
    }
}
