//! Concept taxonomy: a DAG of concepts on six levels whose level-0 nodes are
//! the discipline roots.
//!
//! Loading validates the graph (no duplicates, no dangling edges, no cycles,
//! roots without parents) and drops every concept that cannot reach a root.
//! The resulting [`ConceptTaxonomy`] is immutable.

mod classify;
mod paths;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tsv::{self, TsvError};

pub use classify::{
    classify_all, classify_concept, partition_concepts, write_classification_tsv, Classifiability,
    Classification, DisciplineAssignment, Label, Partition, PartitionSummary, RootMultiplicity,
};
pub use paths::{count_root_paths, PathCountTable, RootPathCounts};

pub const MAX_LEVEL: u8 = 5;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("parse error: {0}")]
    Parse(#[from] TsvError),
    #[error("cycle detected in parent graph: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("edge on line {line} references unknown concept `{id}`")]
    UnknownEdgeId { id: String, line: u64 },
    #[error("duplicate concept id `{0}`")]
    DuplicateConcept(String),
    #[error("root concept `{0}` (level 0) has a parent")]
    RootHasParent(String),
    #[error("concept `{0}` lists itself as a parent")]
    SelfLoop(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("concept `{0}` was removed at load (no ancestor root)")]
    RemovedConcept(String),
    #[error("concept `{0}` has no path counts")]
    EmptyCounts(String),
    #[error("taxonomy has no level-0 concepts")]
    NoRoots,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub name: String,
    pub level: u8,
    pub works_count: u64,
}

impl Concept {
    pub fn is_root(&self) -> bool {
        self.level == 0
    }
}

/// What load dropped or repaired.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub total_concepts: usize,
    pub retained: usize,
    /// Concepts with no ancestor root, in input order.
    pub removed: Vec<String>,
    pub duplicate_edges: usize,
}

#[derive(Debug, Clone)]
pub struct ConceptTaxonomy {
    concepts: Vec<Concept>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    topo_order: Vec<usize>,
    topo_pos: Vec<usize>,
    removed: HashSet<String>,
    report: LoadReport,
}

/// Loads and validates a taxonomy from the concepts and edges TSV files.
pub fn load_taxonomy(
    concepts_file: impl AsRef<Path>,
    edges_file: impl AsRef<Path>,
) -> Result<ConceptTaxonomy, TaxonomyError> {
    let concepts = BufReader::new(File::open(concepts_file)?);
    let edges = BufReader::new(File::open(edges_file)?);
    ConceptTaxonomy::from_readers(concepts, edges)
}

impl ConceptTaxonomy {
    pub fn from_readers<C: Read, E: Read>(concepts: C, edges: E) -> Result<Self, TaxonomyError> {
        let concepts = read_concepts(concepts)?;
        let index: HashMap<String, usize> = concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();
        let (edges, duplicate_edges) = read_edges(edges, &index)?;
        Self::build(concepts, edges, duplicate_edges)
    }

    /// Builds a taxonomy from in-memory concepts and `(child, parent)` pairs.
    pub fn from_parts(
        concepts: Vec<Concept>,
        edges: &[(String, String)],
    ) -> Result<Self, TaxonomyError> {
        let mut index = HashMap::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(TaxonomyError::DuplicateConcept(c.id.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(edges.len());
        let mut duplicates = 0;
        for (line, (child, parent)) in edges.iter().enumerate() {
            let line = line as u64 + 2;
            let c = *index.get(child).ok_or_else(|| TaxonomyError::UnknownEdgeId {
                id: child.clone(),
                line,
            })?;
            let p = *index.get(parent).ok_or_else(|| TaxonomyError::UnknownEdgeId {
                id: parent.clone(),
                line,
            })?;
            if seen.insert((c, p)) {
                pairs.push((c, p));
            } else {
                duplicates += 1;
            }
        }
        Self::build(concepts, pairs, duplicates)
    }

    fn build(
        all: Vec<Concept>,
        edges: Vec<(usize, usize)>,
        duplicate_edges: usize,
    ) -> Result<Self, TaxonomyError> {
        let n = all.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(c, p) in &edges {
            if c == p {
                return Err(TaxonomyError::SelfLoop(all[c].id.clone()));
            }
            if all[c].is_root() {
                return Err(TaxonomyError::RootHasParent(all[c].id.clone()));
            }
            parents[c].push(p);
            children[p].push(c);
        }

        // Reject cycles before anything else: path counts are undefined on them.
        let full_order = kahn_order(n, &parents, &children);
        if full_order.len() < n {
            let mut in_order = vec![false; n];
            for &v in &full_order {
                in_order[v] = true;
            }
            let witness = find_cycle(&parents, &in_order);
            return Err(TaxonomyError::Cycle(
                witness.into_iter().map(|i| all[i].id.clone()).collect(),
            ));
        }

        // Downward reachability from the roots.
        let mut reachable = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| all[i].is_root()).collect();
        if queue.is_empty() {
            return Err(TaxonomyError::NoRoots);
        }
        for &r in &queue {
            reachable[r] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &c in &children[v] {
                if !reachable[c] {
                    reachable[c] = true;
                    queue.push_back(c);
                }
            }
        }

        let mut remap = vec![usize::MAX; n];
        let mut concepts = Vec::new();
        let mut removed_ids = Vec::new();
        for (i, c) in all.into_iter().enumerate() {
            if reachable[i] {
                remap[i] = concepts.len();
                concepts.push(c);
            } else {
                removed_ids.push(c.id);
            }
        }
        let m = concepts.len();
        let mut kept_parents = vec![Vec::new(); m];
        let mut kept_children = vec![Vec::new(); m];
        for (c, p) in edges {
            // A reachable child may have unreachable parents; those edges go.
            if remap[c] != usize::MAX && remap[p] != usize::MAX {
                kept_parents[remap[c]].push(remap[p]);
                kept_children[remap[p]].push(remap[c]);
            }
        }
        let topo_order = kahn_order(m, &kept_parents, &kept_children);
        let mut topo_pos = vec![0; m];
        for (pos, &v) in topo_order.iter().enumerate() {
            topo_pos[v] = pos;
        }
        let roots = (0..m).filter(|&i| concepts[i].is_root()).collect();
        let index = concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();

        let report = LoadReport {
            total_concepts: n,
            retained: m,
            removed: removed_ids.clone(),
            duplicate_edges,
        };
        if !report.removed.is_empty() {
            log::info!(
                "taxonomy: removed {} of {} concepts with no ancestor root",
                report.removed.len(),
                n
            );
        }
        Ok(ConceptTaxonomy {
            concepts,
            index,
            parents: kept_parents,
            children: kept_children,
            roots,
            topo_order,
            topo_pos,
            removed: removed_ids.into_iter().collect(),
            report,
        })
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter()
    }

    /// Internal dense index of a retained concept.
    pub fn index_of(&self, id: &str) -> Result<usize, TaxonomyError> {
        match self.index.get(id) {
            Some(&i) => Ok(i),
            None if self.removed.contains(id) => Err(TaxonomyError::RemovedConcept(id.to_string())),
            None => Err(TaxonomyError::UnknownConcept(id.to_string())),
        }
    }

    pub fn concept_at(&self, idx: usize) -> &Concept {
        &self.concepts[idx]
    }

    pub fn parents_of(&self, id: &str) -> Result<Vec<&str>, TaxonomyError> {
        let i = self.index_of(id)?;
        Ok(self.parents[i]
            .iter()
            .map(|&p| self.concepts[p].id.as_str())
            .collect())
    }

    pub(crate) fn parent_indices(&self, idx: usize) -> &[usize] {
        &self.parents[idx]
    }

    pub fn roots(&self) -> impl Iterator<Item = &Concept> {
        self.roots.iter().map(|&r| &self.concepts[r])
    }

    pub fn root_ids(&self) -> Vec<&str> {
        self.roots.iter().map(|&r| self.concepts[r].id.as_str()).collect()
    }

    pub(crate) fn root_indices(&self) -> &[usize] {
        &self.roots
    }

    pub fn topo_order(&self) -> Vec<&str> {
        self.topo_order
            .iter()
            .map(|&i| self.concepts[i].id.as_str())
            .collect()
    }

    pub(crate) fn topo_indices(&self) -> &[usize] {
        &self.topo_order
    }

    pub(crate) fn topo_position(&self, idx: usize) -> usize {
        self.topo_pos[idx]
    }

    /// Resolves a discipline by root id or exact display name.
    pub fn resolve_root(&self, key: &str) -> Option<&Concept> {
        self.roots()
            .find(|r| r.id == key)
            .or_else(|| self.roots().find(|r| r.name == key))
    }

    pub fn was_removed(&self, id: &str) -> bool {
        self.removed.contains(id)
    }

    #[allow(dead_code)]
    pub(crate) fn children_indices(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }
}

fn read_concepts<R: Read>(input: R) -> Result<Vec<Concept>, TaxonomyError> {
    let mut rdr = tsv::reader(input);
    let cols = tsv::columns(&mut rdr, &["concept_id", "display_name", "level", "works_count"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(TsvError::from)?;
        let line = tsv::line_of(&record);
        let id = tsv::field(&record, cols[0]);
        if id.is_empty() {
            return Err(TsvError::row(line, "empty concept_id").into());
        }
        let level: u8 = tsv::field(&record, cols[2])
            .parse()
            .map_err(|_| TsvError::row(line, "level is not an integer"))?;
        if level > MAX_LEVEL {
            return Err(TsvError::row(line, format!("level {level} outside 0..={MAX_LEVEL}")).into());
        }
        let works_count: u64 = tsv::field(&record, cols[3])
            .parse()
            .map_err(|_| TsvError::row(line, "works_count is not a non-negative integer"))?;
        if !seen.insert(id.to_string()) {
            return Err(TaxonomyError::DuplicateConcept(id.to_string()));
        }
        out.push(Concept {
            id: id.to_string(),
            name: record.get(cols[1]).unwrap_or("").to_string(),
            level,
            works_count,
        });
    }
    Ok(out)
}

fn read_edges<R: Read>(
    input: R,
    index: &HashMap<String, usize>,
) -> Result<(Vec<(usize, usize)>, usize), TaxonomyError> {
    let mut rdr = tsv::reader(input);
    let cols = tsv::columns(&mut rdr, &["child_id", "parent_id"])?;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut duplicates = 0;
    for record in rdr.records() {
        let record = record.map_err(TsvError::from)?;
        let line = tsv::line_of(&record);
        let lookup = |col: usize| {
            let id = tsv::field(&record, col);
            index
                .get(id)
                .copied()
                .ok_or_else(|| TaxonomyError::UnknownEdgeId {
                    id: id.to_string(),
                    line,
                })
        };
        let child = lookup(cols[0])?;
        let parent = lookup(cols[1])?;
        if seen.insert((child, parent)) {
            edges.push((child, parent));
        } else {
            duplicates += 1;
        }
    }
    Ok((edges, duplicates))
}

/// Kahn's algorithm seeded in index order. Returns fewer than `n` nodes when
/// the graph has a cycle.
fn kahn_order(n: usize, parents: &[Vec<usize>], children: &[Vec<usize>]) -> Vec<usize> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    order
}

/// Finds one cycle among the nodes Kahn's algorithm could not order. Every
/// such node has a parent that is also unordered, so walking parents must
/// revisit a node.
fn find_cycle(parents: &[Vec<usize>], ordered: &[bool]) -> Vec<usize> {
    let start = ordered.iter().position(|&o| !o).expect("cycle exists");
    let mut pos_in_walk = HashMap::new();
    let mut walk = Vec::new();
    let mut v = start;
    loop {
        if let Some(&at) = pos_in_walk.get(&v) {
            let mut cycle: Vec<usize> = walk[at..].to_vec();
            // Report in parent -> child direction.
            cycle.reverse();
            cycle.push(cycle[0]);
            return cycle;
        }
        pos_in_walk.insert(v, walk.len());
        walk.push(v);
        v = *parents[v]
            .iter()
            .find(|&&p| !ordered[p])
            .expect("unordered node has an unordered parent");
    }
}
