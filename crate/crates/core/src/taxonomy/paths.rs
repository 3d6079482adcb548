//! Root-to-concept path counting.
//!
//! P(d -> c) obeys P(d -> d) = 1 and P(d -> c) = sum of P(d -> p) over the
//! parents p of c, so one pass in topological order fills the whole table.
//! Counts saturate at `u64::MAX`; saturation is flagged per concept.

use std::collections::HashSet;

use serde::Serialize;

use super::{ConceptTaxonomy, TaxonomyError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootPathCounts {
    pub concept_id: String,
    /// `(discipline_id, count)` for every ancestor root, in taxonomy root order.
    pub counts: Vec<(String, u64)>,
    /// True when at least one count hit `u64::MAX`.
    pub saturated: bool,
}

impl RootPathCounts {
    pub fn get(&self, discipline: &str) -> Option<u64> {
        self.counts
            .iter()
            .find(|(d, _)| d == discipline)
            .map(|&(_, c)| c)
    }

    pub fn total(&self) -> u64 {
        self.counts
            .iter()
            .fold(0u64, |acc, &(_, c)| acc.saturating_add(c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Dense `concept x root` path-count table over a whole taxonomy.
#[derive(Debug, Clone)]
pub struct PathCountTable {
    n_roots: usize,
    counts: Vec<u64>,
    saturated: Vec<bool>,
}

impl PathCountTable {
    pub fn compute(taxonomy: &ConceptTaxonomy) -> Self {
        let n_roots = taxonomy.root_indices().len();
        let n = taxonomy.len();
        let mut counts = vec![0u64; n * n_roots];
        let mut saturated = vec![false; n];
        for (r, &root) in taxonomy.root_indices().iter().enumerate() {
            counts[root * n_roots + r] = 1;
        }
        for &v in taxonomy.topo_indices() {
            let mut sat = false;
            for &p in taxonomy.parent_indices(v) {
                sat |= saturated[p];
                for r in 0..n_roots {
                    let add = counts[p * n_roots + r];
                    let slot = &mut counts[v * n_roots + r];
                    match slot.checked_add(add) {
                        Some(x) => *slot = x,
                        None => {
                            *slot = u64::MAX;
                            sat = true;
                        }
                    }
                }
            }
            saturated[v] = sat;
        }
        PathCountTable {
            n_roots,
            counts,
            saturated,
        }
    }

    pub(crate) fn row(&self, idx: usize) -> &[u64] {
        &self.counts[idx * self.n_roots..(idx + 1) * self.n_roots]
    }

    pub fn counts_for(
        &self,
        taxonomy: &ConceptTaxonomy,
        concept_id: &str,
    ) -> Result<RootPathCounts, TaxonomyError> {
        let idx = taxonomy.index_of(concept_id)?;
        Ok(self.counts_at(taxonomy, idx))
    }

    pub(crate) fn counts_at(&self, taxonomy: &ConceptTaxonomy, idx: usize) -> RootPathCounts {
        RootPathCounts {
            concept_id: taxonomy.concept_at(idx).id.clone(),
            counts: nonzero_counts(taxonomy, self.row(idx)),
            saturated: self.saturated[idx],
        }
    }
}

fn nonzero_counts(taxonomy: &ConceptTaxonomy, row: &[u64]) -> Vec<(String, u64)> {
    taxonomy
        .root_indices()
        .iter()
        .zip(row)
        .filter(|(_, &c)| c > 0)
        .map(|(&r, &c)| (taxonomy.concept_at(r).id.clone(), c))
        .collect()
}

/// Path counts for a single concept, restricted to its ancestor subgraph.
pub fn count_root_paths(
    taxonomy: &ConceptTaxonomy,
    concept_id: &str,
) -> Result<RootPathCounts, TaxonomyError> {
    let target = taxonomy.index_of(concept_id)?;

    let mut ancestors = HashSet::from([target]);
    let mut stack = vec![target];
    while let Some(v) = stack.pop() {
        for &p in taxonomy.parent_indices(v) {
            if ancestors.insert(p) {
                stack.push(p);
            }
        }
    }
    let mut order: Vec<usize> = ancestors.into_iter().collect();
    order.sort_unstable_by_key(|&v| taxonomy.topo_position(v));

    let n_roots = taxonomy.root_indices().len();
    let root_slot = |v: usize| taxonomy.root_indices().iter().position(|&r| r == v);
    let mut local: std::collections::HashMap<usize, (Vec<u64>, bool)> =
        std::collections::HashMap::with_capacity(order.len());
    for v in order {
        let mut row = vec![0u64; n_roots];
        let mut sat = false;
        if let Some(r) = root_slot(v) {
            row[r] = 1;
        }
        for &p in taxonomy.parent_indices(v) {
            let (prow, psat) = &local[&p];
            sat |= *psat;
            for (slot, &add) in row.iter_mut().zip(prow) {
                match slot.checked_add(add) {
                    Some(x) => *slot = x,
                    None => {
                        *slot = u64::MAX;
                        sat = true;
                    }
                }
            }
        }
        local.insert(v, (row, sat));
    }
    let (row, saturated) = local.remove(&target).expect("target computed");
    let counts = nonzero_counts(taxonomy, &row);
    if counts.is_empty() {
        return Err(TaxonomyError::EmptyCounts(concept_id.to_string()));
    }
    Ok(RootPathCounts {
        concept_id: concept_id.to_string(),
        counts,
        saturated,
    })
}
