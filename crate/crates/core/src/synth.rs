//! Synthetic inputs with known structure, for testing and demos.
//!
//! [`PlantedConfig`] produces a works table in which every author draws most
//! concepts from one cluster, together with a two-level taxonomy whose roots
//! are the first concept of each cluster. Concept ids are a cluster letter
//! plus a two-digit index (`a00`, `a01`, ..., `b00`, ...); bridge concepts
//! (`x00`, ...) sit under every root.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{TrajectoryCorpus, WorkRecord};
use crate::embed::EmbeddingSpace;
use crate::navgraph::DenseGraph;
use crate::taxonomy::{Concept, ConceptTaxonomy, TaxonomyError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    pub authors: usize,
    pub clusters: usize,
    pub cluster_size: usize,
    pub works_per_author: usize,
    pub concepts_per_work: usize,
    /// Probability that a token comes from the author's own cluster.
    pub in_cluster: f64,
    pub bridges: usize,
    /// Probability that a token is a bridge concept (taken before the
    /// cluster draw).
    pub bridge_rate: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            authors: 1000,
            clusters: 2,
            cluster_size: 50,
            works_per_author: 60,
            concepts_per_work: 3,
            in_cluster: 0.95,
            bridges: 0,
            bridge_rate: 0.0,
            seed: 7,
        }
    }
}

pub fn cluster_concept(cluster: usize, j: usize) -> String {
    format!("{}{j:02}", (b'a' + cluster as u8) as char)
}

pub fn bridge_concept(j: usize) -> String {
    format!("x{j:02}")
}

#[derive(Debug, Clone)]
pub struct PlantedDataset {
    pub config: PlantedConfig,
    pub works: Vec<WorkRecord>,
    pub concepts: Vec<Concept>,
    /// `(child, parent)` pairs.
    pub edges: Vec<(String, String)>,
}

impl PlantedConfig {
    pub fn generate(&self) -> PlantedDataset {
        assert!(self.clusters >= 1 && self.clusters <= 23, "clusters must be in 1..=23");
        assert!(self.cluster_size >= 1 && self.cluster_size <= 100);
        assert!(self.bridges <= 100);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut works = Vec::with_capacity(self.authors * self.works_per_author);
        let mut works_count = vec![vec![0u64; self.cluster_size]; self.clusters];
        let mut bridge_count = vec![0u64; self.bridges];
        for a in 0..self.authors {
            let home = a % self.clusters;
            let author_id = format!("au{a:05}");
            for w in 0..self.works_per_author {
                let mut concept_ids = Vec::with_capacity(self.concepts_per_work);
                let mut in_work_c = vec![false; self.clusters * self.cluster_size];
                let mut in_work_b = vec![false; self.bridges];
                for _ in 0..self.concepts_per_work {
                    if self.bridges > 0 && rng.random::<f64>() < self.bridge_rate {
                        let j = rng.random_range(0..self.bridges);
                        concept_ids.push(bridge_concept(j));
                        if !std::mem::replace(&mut in_work_b[j], true) {
                            bridge_count[j] += 1;
                        }
                        continue;
                    }
                    let cluster = if self.clusters == 1 || rng.random::<f64>() < self.in_cluster {
                        home
                    } else {
                        let other = rng.random_range(0..self.clusters - 1);
                        if other >= home {
                            other + 1
                        } else {
                            other
                        }
                    };
                    let j = rng.random_range(0..self.cluster_size);
                    concept_ids.push(cluster_concept(cluster, j));
                    if !std::mem::replace(&mut in_work_c[cluster * self.cluster_size + j], true) {
                        works_count[cluster][j] += 1;
                    }
                }
                works.push(WorkRecord {
                    work_id: format!("w{a:05}_{w:03}"),
                    author_id: author_id.clone(),
                    year: 1990 + (w % 30) as i32,
                    concept_ids,
                });
            }
        }

        let mut concepts = Vec::new();
        let mut edges = Vec::new();
        for (c, counts) in works_count.iter().enumerate() {
            let root = cluster_concept(c, 0);
            for (j, &count) in counts.iter().enumerate() {
                let id = cluster_concept(c, j);
                concepts.push(Concept {
                    name: if j == 0 {
                        format!("Discipline {}", (b'A' + c as u8) as char)
                    } else {
                        format!("Concept {id}")
                    },
                    level: u8::from(j != 0),
                    works_count: count,
                    id: id.clone(),
                });
                if j != 0 {
                    edges.push((id, root.clone()));
                }
            }
        }
        for (j, &count) in bridge_count.iter().enumerate() {
            let id = bridge_concept(j);
            concepts.push(Concept {
                id: id.clone(),
                name: format!("Bridge {id}"),
                level: 1,
                works_count: count,
            });
            for c in 0..self.clusters {
                edges.push((id.clone(), cluster_concept(c, 0)));
            }
        }
        PlantedDataset {
            config: self.clone(),
            works,
            concepts,
            edges,
        }
    }
}

impl PlantedDataset {
    pub fn taxonomy(&self) -> Result<ConceptTaxonomy, TaxonomyError> {
        ConceptTaxonomy::from_parts(self.concepts.clone(), &self.edges)
    }

    /// Trajectories for authors with more than `min_pubs` works.
    pub fn corpus(&self, min_pubs: usize) -> TrajectoryCorpus {
        let mut corpus = TrajectoryCorpus {
            min_pubs,
            ..Default::default()
        };
        for chunk in self.works.chunk_by(|a, b| a.author_id == b.author_id) {
            corpus.push_author(chunk.to_vec());
        }
        corpus
    }

    /// Cluster index of a concept id, `None` for bridges.
    pub fn cluster_of(id: &str) -> Option<usize> {
        let first = id.bytes().next()?;
        (first != b'x').then(|| (first - b'a') as usize)
    }

    pub fn write_works_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "author_id\twork_id\tyear\tconcept_ids")?;
        for w in &self.works {
            writeln!(out, "{}\t{}\t{}\t{}", w.author_id, w.work_id, w.year, w.concept_ids.join("|"))?;
        }
        out.flush()
    }

    pub fn write_concepts_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "concept_id\tdisplay_name\tlevel\tworks_count")?;
        for c in &self.concepts {
            writeln!(out, "{}\t{}\t{}\t{}", c.id, c.name, c.level, c.works_count)?;
        }
        out.flush()
    }

    pub fn write_edges_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "child_id\tparent_id")?;
        for (child, parent) in &self.edges {
            writeln!(out, "{child}\t{parent}")?;
        }
        out.flush()
    }
}

/// `n` vectors with independent standard normal entries, ids `v0000`, ...
pub fn gaussian_space(n: usize, dim: usize, seed: u64) -> EmbeddingSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.max(2).saturating_sub(1).to_string().len();
    let vocab = (0..n).map(|i| format!("v{i:0width$}")).collect();
    let matrix = (0..n * dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    EmbeddingSpace::from_matrix(vocab, dim, matrix).expect("gaussian rows are nonzero")
}

/// Clustered geometry: cluster `c` has center `scale * e_c` plus isotropic
/// noise of standard deviation `noise`. Ids follow [`cluster_concept`].
pub fn clustered_space(clusters: usize, per_cluster: usize, dim: usize, noise: f64, seed: u64) -> EmbeddingSpace {
    assert!(clusters <= dim, "one axis per cluster");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(clusters * per_cluster);
    for c in 0..clusters {
        for j in 0..per_cluster {
            let v = (0..dim)
                .map(|k| f64::from(u8::from(k == c)) + noise * rng.sample::<f64, _>(StandardNormal))
                .collect();
            rows.push((cluster_concept(c, j), v));
        }
    }
    EmbeddingSpace::from_rows(rows).expect("clustered rows are nonzero")
}

/// Complete graph with a tight group `H` (nodes `h00..`, pairwise weights in
/// `[0.1, 0.2)`), a loose group `L` (`l00..`, weights in `[1.5, 2.0)`) and
/// cross weights in `[0.9, 1.1)`.
pub fn two_density_graph(h: usize, l: usize, seed: u64) -> DenseGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = h + l;
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let range = match (i < h, j < h) {
                (true, true) => 0.1..0.2,
                (false, false) => 1.5..2.0,
                _ => 0.9..1.1,
            };
            let x = rng.random_range(range);
            w[i * n + j] = x;
            w[j * n + i] = x;
        }
    }
    let ids = (0..n)
        .map(|i| if i < h { format!("h{i:02}") } else { format!("l{:02}", i - h) })
        .collect();
    DenseGraph::new(ids, w).expect("weights are valid")
}
