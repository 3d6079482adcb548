use serde::{Deserialize, Serialize};

use super::SemanticsError;
use crate::embed::EmbeddingSpace;
use crate::stats::{median, rank_sum_greater, RankSumTest, Summary};
use crate::taxonomy::{Classification, DisciplineAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropensityMode {
    /// Classifiable concepts against their own discipline root (DR) versus
    /// the other roots (NDR).
    #[serde(rename = "dr_vs_ndr")]
    Classified,
    /// Indistinguishable concepts against their ancestor roots (AR) versus the
    /// rest (NAR).
    #[serde(rename = "ar_vs_nar")]
    Indistinguishable,
}

impl PropensityMode {
    fn selects(self, a: &DisciplineAssignment) -> bool {
        !a.is_root
            && match self {
                PropensityMode::Classified => a.in_s_plus(),
                PropensityMode::Indistinguishable => a.in_m_minus(),
            }
    }

    fn in_group(self, a: &DisciplineAssignment, root: &str) -> bool {
        match self {
            PropensityMode::Classified => a.label.discipline() == Some(root),
            PropensityMode::Indistinguishable => a.ancestor_roots.iter().any(|r| r == root),
        }
    }
}

/// Radar data for one discipline root: similarities of in-group and
/// out-group concepts to that root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarRow {
    pub discipline: String,
    pub in_group: Option<Summary>,
    pub out_group: Option<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityReport {
    pub mode: PropensityMode,
    pub roots: Vec<String>,
    /// Roots absent from the embedding vocabulary.
    pub skipped_roots: Vec<String>,
    pub concepts: usize,
    pub in_group: Vec<f64>,
    pub out_group: Vec<f64>,
    pub in_summary: Option<Summary>,
    pub out_summary: Option<Summary>,
    /// `median(in) - median(out)`.
    pub median_shift: f64,
    /// One-sided test that in-group similarities exceed out-group ones.
    pub test: Option<RankSumTest>,
    pub per_discipline: Vec<RadarRow>,
}

/// Splits every (concept, root) similarity into in-group and out-group per
/// the mode. Pairs are pooled per concept-root pair, so disciplines with more
/// concepts weigh more.
pub fn propensity_report(
    space: &EmbeddingSpace,
    classification: &Classification,
    mode: PropensityMode,
) -> Result<PropensityReport, SemanticsError> {
    let mut roots = Vec::new();
    let mut skipped_roots = Vec::new();
    for a in classification.iter().filter(|a| a.is_root) {
        match space.index_of(&a.concept_id) {
            Ok(idx) => roots.push((a.concept_id.clone(), idx)),
            Err(_) => {
                log::warn!("discipline root `{}` has no embedding; skipped", a.concept_id);
                skipped_roots.push(a.concept_id.clone());
            }
        }
    }
    if roots.is_empty() {
        return Err(SemanticsError::NoRoots);
    }

    let mut in_group = Vec::new();
    let mut out_group = Vec::new();
    let mut per_root: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); roots.len()];
    let mut concepts = 0;
    for a in classification.iter().filter(|a| mode.selects(a)) {
        let Ok(idx) = space.index_of(&a.concept_id) else { continue };
        concepts += 1;
        for (k, (root, ridx)) in roots.iter().enumerate() {
            let s = space.similarity_at(idx, *ridx);
            if mode.in_group(a, root) {
                in_group.push(s);
                per_root[k].0.push(s);
            } else {
                out_group.push(s);
                per_root[k].1.push(s);
            }
        }
    }

    let per_discipline = roots
        .iter()
        .zip(&per_root)
        .map(|((root, _), (inside, outside))| RadarRow {
            discipline: root.clone(),
            in_group: Summary::of(inside),
            out_group: Summary::of(outside),
        })
        .collect();
    let median_shift = match (median(&in_group), median(&out_group)) {
        (Some(a), Some(b)) => a - b,
        _ => 0.0,
    };
    Ok(PropensityReport {
        mode,
        roots: roots.into_iter().map(|(r, _)| r).collect(),
        skipped_roots,
        concepts,
        in_summary: Summary::of(&in_group),
        out_summary: Summary::of(&out_group),
        median_shift,
        test: rank_sum_greater(&in_group, &out_group),
        in_group,
        out_group,
        per_discipline,
    })
}
