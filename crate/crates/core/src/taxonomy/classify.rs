//! Discipline classification from root path counts.
//!
//! A concept with a single ancestor root belongs to it (tag S). A concept with
//! several ancestor roots (tag M) belongs to the root with the most paths to
//! it when that maximum is unique, and is multi-interdisciplinary otherwise.
//! S plus the uniquely classified part of M form S+, the rest is M-.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::paths::{PathCountTable, RootPathCounts};
use super::{ConceptTaxonomy, TaxonomyError};

pub const MULTI_LABEL: &str = "Multi-interdisciplinary";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "discipline", rename_all = "snake_case")]
pub enum Label {
    Disciplinary(String),
    MultiInterdisciplinary,
}

impl Label {
    pub fn discipline(&self) -> Option<&str> {
        match self {
            Label::Disciplinary(d) => Some(d),
            Label::MultiInterdisciplinary => None,
        }
    }

    pub fn as_str(&self) -> &str {
        self.discipline().unwrap_or(MULTI_LABEL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootMultiplicity {
    /// Exactly one ancestor root.
    S,
    /// Two or more ancestor roots.
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classifiability {
    #[serde(rename = "S+")]
    Classifiable,
    #[serde(rename = "M-")]
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisciplineAssignment {
    pub concept_id: String,
    pub ancestor_roots: Vec<String>,
    pub path_counts: RootPathCounts,
    pub label: Label,
    pub multiplicity: RootMultiplicity,
    pub classifiability: Classifiability,
    /// Level-0 concepts classify to themselves and sit outside the partition.
    pub is_root: bool,
}

impl DisciplineAssignment {
    /// Compact tag used in exports: `S`, `M+`, `M-` or `root`.
    pub fn tag(&self) -> &'static str {
        if self.is_root {
            return "root";
        }
        match (self.multiplicity, self.classifiability) {
            (RootMultiplicity::S, _) => "S",
            (RootMultiplicity::M, Classifiability::Classifiable) => "M+",
            (RootMultiplicity::M, Classifiability::Indistinguishable) => "M-",
        }
    }

    pub fn in_s_plus(&self) -> bool {
        !self.is_root && self.classifiability == Classifiability::Classifiable
    }

    pub fn in_m_minus(&self) -> bool {
        !self.is_root && self.classifiability == Classifiability::Indistinguishable
    }

    pub fn is_multi_root(&self) -> bool {
        !self.is_root && self.multiplicity == RootMultiplicity::M
    }

    pub fn is_single_root(&self) -> bool {
        !self.is_root && self.multiplicity == RootMultiplicity::S
    }
}

pub fn classify_concept(
    taxonomy: &ConceptTaxonomy,
    counts: &RootPathCounts,
) -> Result<DisciplineAssignment, TaxonomyError> {
    let concept = taxonomy
        .concept(&counts.concept_id)
        .ok_or_else(|| TaxonomyError::UnknownConcept(counts.concept_id.clone()))?;
    if counts.is_empty() {
        return Err(TaxonomyError::EmptyCounts(counts.concept_id.clone()));
    }
    let ancestor_roots: Vec<String> = counts.counts.iter().map(|(d, _)| d.clone()).collect();
    let multiplicity = if ancestor_roots.len() == 1 {
        RootMultiplicity::S
    } else {
        RootMultiplicity::M
    };

    if concept.is_root() {
        return Ok(DisciplineAssignment {
            concept_id: concept.id.clone(),
            ancestor_roots,
            path_counts: counts.clone(),
            label: Label::Disciplinary(concept.id.clone()),
            multiplicity: RootMultiplicity::S,
            classifiability: Classifiability::Classifiable,
            is_root: true,
        });
    }

    // Saturated maxima tie at u64::MAX and therefore fall to M-.
    let max = counts.counts.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let mut winners = counts.counts.iter().filter(|&&(_, c)| c == max);
    let first = winners.next().map(|(d, _)| d.clone());
    let (label, classifiability) = match (first, winners.next()) {
        (Some(d), None) => (Label::Disciplinary(d), Classifiability::Classifiable),
        _ => (Label::MultiInterdisciplinary, Classifiability::Indistinguishable),
    };
    Ok(DisciplineAssignment {
        concept_id: concept.id.clone(),
        ancestor_roots,
        path_counts: counts.clone(),
        label,
        multiplicity,
        classifiability,
        is_root: false,
    })
}

/// Assignments for every retained concept, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct Classification {
    order: Vec<String>,
    by_id: HashMap<String, DisciplineAssignment>,
}

impl Classification {
    pub fn get(&self, id: &str) -> Option<&DisciplineAssignment> {
        self.by_id.get(id)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Assignments in taxonomy order.
    pub fn iter(&self) -> impl Iterator<Item = &DisciplineAssignment> {
        self.order.iter().map(|id| &self.by_id[id])
    }

    /// Builds a classification from explicit assignments (test fixtures,
    /// imported files).
    pub fn from_assignments(assignments: impl IntoIterator<Item = DisciplineAssignment>) -> Self {
        let mut out = Classification::default();
        for a in assignments {
            if !out.by_id.contains_key(&a.concept_id) {
                out.order.push(a.concept_id.clone());
            }
            out.by_id.insert(a.concept_id.clone(), a);
        }
        out
    }
}

pub fn classify_all(taxonomy: &ConceptTaxonomy) -> Result<Classification, TaxonomyError> {
    let table = PathCountTable::compute(taxonomy);
    let mut assignments = Vec::with_capacity(taxonomy.len());
    for idx in 0..taxonomy.len() {
        let counts = table.counts_at(taxonomy, idx);
        assignments.push(classify_concept(taxonomy, &counts)?);
    }
    Ok(Classification::from_assignments(assignments))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PartitionSummary {
    pub s: usize,
    pub m: usize,
    pub s_plus: usize,
    pub m_minus: usize,
    /// Level-0 concepts, excluded from the four sets.
    pub roots: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub s: Vec<String>,
    pub m: Vec<String>,
    pub s_plus: Vec<String>,
    pub m_minus: Vec<String>,
    pub summary: PartitionSummary,
}

pub fn partition_concepts(classification: &Classification) -> Partition {
    let mut p = Partition::default();
    for a in classification.iter() {
        if a.is_root {
            p.summary.roots += 1;
            continue;
        }
        match a.multiplicity {
            RootMultiplicity::S => p.s.push(a.concept_id.clone()),
            RootMultiplicity::M => p.m.push(a.concept_id.clone()),
        }
        match a.classifiability {
            Classifiability::Classifiable => p.s_plus.push(a.concept_id.clone()),
            Classifiability::Indistinguishable => p.m_minus.push(a.concept_id.clone()),
        }
    }
    p.summary.s = p.s.len();
    p.summary.m = p.m.len();
    p.summary.s_plus = p.s_plus.len();
    p.summary.m_minus = p.m_minus.len();
    p
}

/// Writes `concept_id, label, ancestor_roots, path_counts, tag`.
pub fn write_classification_tsv<W: Write>(
    classification: &Classification,
    out: W,
) -> std::io::Result<()> {
    let mut w = crate::tsv::writer(out);
    w.write_record(["concept_id", "label", "ancestor_roots", "path_counts", "tag"])?;
    for a in classification.iter() {
        let counts = a
            .path_counts
            .counts
            .iter()
            .map(|(d, c)| format!("{d}={c}"))
            .collect::<Vec<_>>()
            .join("|");
        w.write_record([
            a.concept_id.as_str(),
            a.label.as_str(),
            &a.ancestor_roots.join("|"),
            &counts,
            a.tag(),
        ])?;
    }
    w.flush()
}
