use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::SemanticsError;
use crate::embed::{norm, EmbeddingSpace};
use crate::stats::Summary;
use crate::taxonomy::{Classification, ConceptTaxonomy};

/// A named set of disciplines, given by root id or display name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDef {
    pub name: String,
    pub disciplines: Vec<String>,
}

impl GroupDef {
    fn new(name: &str, disciplines: &[&str]) -> Self {
        GroupDef {
            name: name.to_string(),
            disciplines: disciplines.iter().map(|d| d.to_string()).collect(),
        }
    }

    /// Parses a JSON object mapping group name to discipline list.
    pub fn parse_json(text: &str) -> Result<Vec<GroupDef>, SemanticsError> {
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        Ok(map
            .into_iter()
            .map(|(name, disciplines)| GroupDef { name, disciplines })
            .collect())
    }
}

/// The eight functional groups over the 19 disciplines.
pub fn default_groups() -> Vec<GroupDef> {
    vec![
        GroupDef::new("Theoretical", &["Mathematics", "Physics"]),
        GroupDef::new("Applied", &["Computer science", "Engineering"]),
        GroupDef::new("Chemical", &["Chemistry", "Materials science"]),
        GroupDef::new("Biomedical", &["Biology", "Medicine"]),
        GroupDef::new("Societal", &["Sociology", "Political science", "Psychology"]),
        GroupDef::new("Economic", &["Economics", "Business"]),
        GroupDef::new("Humanities", &["Philosophy", "History", "Art"]),
        GroupDef::new("Geographical", &["Geography", "Geology", "Environmental science"]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalGroup {
    pub name: String,
    /// Resolved root ids.
    pub discipline_ids: Vec<String>,
    /// Non-root classifiable concepts labeled with one of the disciplines.
    pub members: Vec<String>,
}

/// Resolves every group against the taxonomy roots and collects members from
/// the classification.
pub fn resolve_groups(
    defs: &[GroupDef],
    taxonomy: &ConceptTaxonomy,
    classification: &Classification,
) -> Result<Vec<FunctionalGroup>, SemanticsError> {
    let mut out = Vec::with_capacity(defs.len());
    for def in defs {
        let mut ids = Vec::with_capacity(def.disciplines.len());
        for key in &def.disciplines {
            let root = taxonomy
                .resolve_root(key)
                .ok_or_else(|| SemanticsError::UnknownDiscipline {
                    group: def.name.clone(),
                    discipline: key.clone(),
                })?;
            ids.push(root.id.clone());
        }
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let members = classification
            .iter()
            .filter(|a| !a.is_root && a.in_s_plus())
            .filter(|a| a.label.discipline().is_some_and(|d| wanted.contains(d)))
            .map(|a| a.concept_id.clone())
            .collect::<Vec<_>>();
        if members.is_empty() {
            return Err(SemanticsError::EmptyGroup(def.name.clone()));
        }
        out.push(FunctionalGroup {
            name: def.name.clone(),
            discipline_ids: ids,
            members,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalAxis {
    pub from_group: String,
    pub to_group: String,
    /// `mean(to) - mean(from)`.
    pub vector: Vec<f64>,
    pub from_mean: Vec<f64>,
    pub to_mean: Vec<f64>,
}

fn group_mean(space: &EmbeddingSpace, group: &FunctionalGroup) -> Result<Vec<f64>, SemanticsError> {
    let mut sum = vec![0.0; space.dim()];
    let mut n = 0usize;
    for id in &group.members {
        if let Ok(idx) = space.index_of(id) {
            for (s, &x) in sum.iter_mut().zip(space.row(idx)) {
                *s += x;
            }
            n += 1;
        }
    }
    if n == 0 {
        return Err(SemanticsError::EmptyGroup(group.name.clone()));
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}

pub fn build_axis(
    space: &EmbeddingSpace,
    from: &FunctionalGroup,
    to: &FunctionalGroup,
) -> Result<FunctionalAxis, SemanticsError> {
    let from_mean = group_mean(space, from)?;
    let to_mean = group_mean(space, to)?;
    let vector: Vec<f64> = to_mean.iter().zip(&from_mean).map(|(t, f)| t - f).collect();
    if norm(&vector) <= 1e-9 {
        return Err(SemanticsError::ZeroAxis {
            from: from.name.clone(),
            to: to.name.clone(),
        });
    }
    Ok(FunctionalAxis {
        from_group: from.name.clone(),
        to_group: to.name.clone(),
        vector,
        from_mean,
        to_mean,
    })
}

/// One discipline's sample with its summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub discipline: String,
    pub values: Vec<f64>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub from_group: String,
    pub to_group: String,
    pub rows: Vec<DistributionRow>,
}

impl ProjectionReport {
    pub fn row(&self, discipline: &str) -> Option<&DistributionRow> {
        self.rows.iter().find(|r| r.discipline == discipline)
    }
}

/// Cosine similarity of every embedded classifiable concept to the axis,
/// grouped by discipline label. Disciplines with no embedded member are
/// omitted.
pub fn axis_projection_report(
    space: &EmbeddingSpace,
    classification: &Classification,
    axis: &FunctionalAxis,
) -> Result<ProjectionReport, SemanticsError> {
    let mut by_discipline: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for a in classification.iter() {
        if a.is_root {
            order.push(&a.concept_id);
            continue;
        }
        let Some(d) = a.label.discipline() else { continue };
        let Ok(idx) = space.index_of(&a.concept_id) else { continue };
        let s = space.similarity_to_vector(idx, &axis.vector)?;
        by_discipline.entry(d).or_default().push(s);
    }
    let rows = order
        .into_iter()
        .filter_map(|d| {
            let values = by_discipline.remove(d)?;
            let summary = Summary::of(&values)?;
            Some(DistributionRow {
                discipline: d.to_string(),
                values,
                summary,
            })
        })
        .collect();
    Ok(ProjectionReport {
        from_group: axis.from_group.clone(),
        to_group: axis.to_group.clone(),
        rows,
    })
}

/// `name, n, mean, q5, q50, q95`, one row per discipline.
pub fn write_distribution_tsv<W: Write>(rows: &[DistributionRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "name\tn\tmean\tq5\tq50\tq95")?;
    for r in rows {
        let s = &r.summary;
        writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", r.discipline, s.n, s.mean, s.q5, s.q50, s.q95)?;
    }
    out.flush()
}
