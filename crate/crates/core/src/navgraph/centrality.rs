use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::paths::{dijkstra, sample_sources};
use super::{NavError, WeightedGraph};
use crate::stats::Summary;
use crate::taxonomy::{Classification, RootMultiplicity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Closeness,
    Betweenness,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Closeness => "closeness",
            Measure::Betweenness => "betweenness",
        })
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closeness" => Ok(Measure::Closeness),
            "betweenness" => Ok(Measure::Betweenness),
            other => Err(format!("measure must be closeness or betweenness, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Exactness {
    Exact,
    Pivots { pivots: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetweennessMode {
    Exact,
    Pivots { pivots: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub measure: Measure,
    pub ids: Vec<String>,
    pub scores: Vec<f64>,
    /// Node indices by descending score, ties by ascending id.
    pub ranking: Vec<usize>,
    pub exactness: Exactness,
}

impl CentralityReport {
    pub fn from_scores(measure: Measure, ids: Vec<String>, scores: Vec<f64>, exactness: Exactness) -> Self {
        let mut ranking: Vec<usize> = (0..ids.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
        CentralityReport {
            measure,
            ids,
            scores,
            ranking,
            exactness,
        }
    }

    pub fn score(&self, id: &str) -> Option<f64> {
        self.ids.iter().position(|x| x == id).map(|i| self.scores[i])
    }

    /// The `k` highest-ranked ids.
    pub fn top(&self, k: usize) -> Vec<&str> {
        self.ranking.iter().take(k).map(|&i| self.ids[i].as_str()).collect()
    }

    /// The `k` lowest-ranked ids, lowest first.
    pub fn bottom(&self, k: usize) -> Vec<&str> {
        self.ranking.iter().rev().take(k).map(|&i| self.ids[i].as_str()).collect()
    }
}

fn ids_of<G: WeightedGraph + ?Sized>(g: &G) -> Vec<String> {
    (0..g.node_count()).map(|i| g.node_id(i).to_string()).collect()
}

/// Mean shortest distance from `i` to the nodes of `reachable`, ignoring `i`
/// itself.
pub fn avg_sd<G: WeightedGraph + ?Sized>(g: &G, i: usize, reachable: &[usize]) -> Result<f64, NavError> {
    let sp = dijkstra(g, i, None);
    mean_over(&sp.dist, i, reachable).ok_or(NavError::EmptyReachable)
}

fn mean_over(dist: &[f64], i: usize, reachable: &[usize]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for &j in reachable {
        if j != i {
            sum += dist[j];
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// `1 / AvgSD(i -> every other node)` for every node.
pub fn closeness_centrality<G: WeightedGraph + ?Sized>(g: &G) -> Result<CentralityReport, NavError> {
    let n = g.node_count();
    if n < 2 {
        return Err(NavError::TooFewNodes { needed: 2, got: n });
    }
    let everyone: Vec<usize> = (0..n).collect();
    let scores: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let sp = dijkstra(g, i, None);
            1.0 / mean_over(&sp.dist, i, &everyone).expect("n >= 2")
        })
        .collect();
    Ok(CentralityReport::from_scores(Measure::Closeness, ids_of(g), scores, Exactness::Exact))
}

/// Brandes dependencies from one source, added into `acc`.
fn accumulate_source<G: WeightedGraph + ?Sized>(g: &G, s: usize, acc: &mut [f64], scratch: &mut BrandesScratch) {
    let n = g.node_count();
    let BrandesScratch {
        dist,
        sigma,
        delta,
        done,
        preds,
        order,
        buf,
    } = scratch;
    dist.clear();
    dist.resize(n, f64::INFINITY);
    sigma.clear();
    sigma.resize(n, 0.0);
    delta.clear();
    delta.resize(n, 0.0);
    done.clear();
    done.resize(n, false);
    preds.resize_with(n, Vec::new);
    for p in preds.iter_mut() {
        p.clear();
    }
    order.clear();

    dist[s] = 0.0;
    sigma[s] = 1.0;
    loop {
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
        order.push(u);
        let row = g.weight_row(u, buf);
        for v in 0..n {
            if done[v] {
                continue;
            }
            let nd = best + row[v];
            if !nd.is_finite() {
                continue;
            }
            if nd < dist[v] {
                dist[v] = nd;
                sigma[v] = sigma[u];
                preds[v].clear();
                preds[v].push(u);
            } else if nd == dist[v] {
                sigma[v] += sigma[u];
                preds[v].push(u);
            }
        }
    }
    for &w in order.iter().rev() {
        let coeff = (1.0 + delta[w]) / sigma[w];
        for &v in &preds[w] {
            delta[v] += sigma[v] * coeff;
        }
        if w != s {
            acc[w] += delta[w];
        }
    }
}

#[derive(Default)]
struct BrandesScratch {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    done: Vec<bool>,
    preds: Vec<Vec<usize>>,
    order: Vec<usize>,
    buf: Vec<f64>,
}

/// Share of ordered source-target pairs (both different from the node)
/// whose shortest paths pass through each node. A pair with several
/// shortest paths contributes the fraction of them through the node.
///
/// Pivot mode runs the accumulation from `pivots` distinct sources and scales
/// by `n / pivots`. Edge weights must be positive for exact path
/// multiplicities.
pub fn betweenness_centrality<G: WeightedGraph + ?Sized>(
    g: &G,
    mode: BetweennessMode,
) -> Result<CentralityReport, NavError> {
    let n = g.node_count();
    let (sources, exactness) = match mode {
        BetweennessMode::Exact => ((0..n).collect::<Vec<_>>(), Exactness::Exact),
        BetweennessMode::Pivots { pivots, seed } => {
            if pivots == 0 || pivots > n {
                return Err(NavError::BadPivots { pivots, nodes: n });
            }
            (sample_sources(n, pivots, seed), Exactness::Pivots { pivots, seed })
        }
    };
    let raw = sources
        .par_iter()
        .fold(
            || (vec![0.0; n], BrandesScratch::default()),
            |(mut acc, mut scratch), &s| {
                accumulate_source(g, s, &mut acc, &mut scratch);
                (acc, scratch)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(
            || vec![0.0; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let scale = n as f64 / sources.len().max(1) as f64;
    let pairs = if n > 2 { ((n - 1) * (n - 2)) as f64 } else { 1.0 };
    let scores = raw.into_iter().map(|x| x * scale / pairs).collect();
    Ok(CentralityReport::from_scores(Measure::Betweenness, ids_of(g), scores, exactness))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsRow {
    pub top_k: usize,
    pub count_m: usize,
    pub count_s: usize,
    /// `count_m / count_s`; `None` when no S-tagged node is in the top k.
    pub odds: Option<f64>,
}

impl OddsRow {
    pub fn from_counts(top_k: usize, count_m: usize, count_s: usize) -> Self {
        OddsRow {
            top_k,
            count_m,
            count_s,
            odds: (count_s > 0).then(|| count_m as f64 / count_s as f64),
        }
    }
}

/// Counts multi-root (M) and single-root (S) concepts among the top-k of the
/// ranking. Roots and unclassified nodes count as neither.
pub fn centrality_odds_table(
    report: &CentralityReport,
    classification: &Classification,
    top_ks: &[usize],
) -> Vec<OddsRow> {
    top_ks
        .iter()
        .map(|&k| {
            let mut m = 0;
            let mut s = 0;
            for id in report.top(k) {
                match classification.get(id) {
                    Some(a) if !a.is_root => match a.multiplicity {
                        RootMultiplicity::M => m += 1,
                        RootMultiplicity::S => s += 1,
                    },
                    _ => {}
                }
            }
            OddsRow::from_counts(k, m, s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlReport {
    pub k: usize,
    pub h: Vec<String>,
    pub l: Vec<String>,
    /// AvgSD of each H node to the rest of H.
    pub h_to_h: Vec<f64>,
    /// AvgSD of each L node to the rest of L.
    pub l_to_l: Vec<f64>,
    /// AvgSD of each H node to L.
    pub h_to_l: Vec<f64>,
    pub summary_h_to_h: Summary,
    pub summary_l_to_l: Summary,
    pub summary_h_to_l: Summary,
}

/// H is the top `k` of the ranking, L the bottom `k`.
pub fn hl_avgsd_report<G: WeightedGraph + ?Sized>(
    g: &G,
    report: &CentralityReport,
    k: usize,
) -> Result<HlReport, NavError> {
    let n = g.node_count();
    if 2 * k > n {
        return Err(NavError::HlTooLarge { k, n });
    }
    if k < 2 {
        return Err(NavError::EmptyReachable);
    }
    let to_idx = |ids: Vec<&str>| -> Result<Vec<usize>, NavError> { ids.into_iter().map(|id| g.node_index(id)).collect() };
    let h = to_idx(report.top(k))?;
    let l = to_idx(report.bottom(k))?;
    let h_rows: Vec<(f64, f64)> = h
        .par_iter()
        .map(|&i| {
            let sp = dijkstra(g, i, None);
            (
                mean_over(&sp.dist, i, &h).expect("k >= 2"),
                mean_over(&sp.dist, i, &l).expect("k >= 2"),
            )
        })
        .collect();
    let l_to_l: Vec<f64> = l
        .par_iter()
        .map(|&i| mean_over(&dijkstra(g, i, None).dist, i, &l).expect("k >= 2"))
        .collect();
    let h_to_h: Vec<f64> = h_rows.iter().map(|r| r.0).collect();
    let h_to_l: Vec<f64> = h_rows.iter().map(|r| r.1).collect();
    let names = |v: &[usize]| v.iter().map(|&i| g.node_id(i).to_string()).collect::<Vec<_>>();
    debug_assert!(h.iter().collect::<HashSet<_>>().is_disjoint(&l.iter().collect()));
    Ok(HlReport {
        k,
        h: names(&h),
        l: names(&l),
        summary_h_to_h: Summary::of(&h_to_h).expect("nonempty"),
        summary_l_to_l: Summary::of(&l_to_l).expect("nonempty"),
        summary_h_to_l: Summary::of(&h_to_l).expect("nonempty"),
        h_to_h,
        l_to_l,
        h_to_l,
    })
}

/// `concept_id, score, rank` with rank starting at 1.
pub fn write_centrality_tsv<W: Write>(report: &CentralityReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "concept_id\tscore\trank")?;
    for (rank, &i) in report.ranking.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}", report.ids[i], report.scores[i], rank + 1)?;
    }
    out.flush()
}

pub fn write_odds_tsv<W: Write>(measure: Measure, rows: &[OddsRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "measure\ttop_k\tcount_M\tcount_S\todds")?;
    for r in rows {
        let odds = r.odds.map(|o| format!("{o:.2}")).unwrap_or_else(|| "NA".into());
        writeln!(out, "{measure}\t{}\t{}\t{}\t{odds}", r.top_k, r.count_m, r.count_s)?;
    }
    out.flush()
}
