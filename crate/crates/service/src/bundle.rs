//! Frozen artifacts behind the API and the manifest that pins them.
//!
//! `bundle.json` names the input files (relative to the manifest) and their
//! sha256 digests. Loading recomputes every digest and refuses to continue on
//! a mismatch. The bundle digest is the sha256 of the `name=digest` lines in
//! name order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use sciconnav_core::embed::{load_embeddings, EmbedError};
use sciconnav_core::navgraph::{
    betweenness_centrality, closeness_centrality, BetweennessMode, CentralityReport, Measure, NavError,
    DEFAULT_CACHE_LIMIT,
};
use sciconnav_core::semantics::{build_axis, default_groups, resolve_groups, FunctionalAxis, FunctionalGroup, GroupDef, SemanticsError};
use sciconnav_core::taxonomy::{classify_all, load_taxonomy, TaxonomyError};
use sciconnav_core::{Classification, ConceptTaxonomy, EmbeddingSpace, NavigationGraph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::map2d::{pca_map, MapPoint};

pub const MANIFEST_FILE: &str = "bundle.json";
pub const DEFAULT_TOP_N: usize = 20_000;
pub const DEFAULT_PIVOTS: usize = 256;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad manifest `{path}`: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("digest mismatch for {name} (`{path}`): manifest has {expected}, file has {actual}")]
    DigestMismatch {
        name: String,
        path: PathBuf,
        expected: String,
        actual: String,
    },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error("no taxonomy concept has an embedding")]
    NoOverlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub concepts: PathBuf,
    pub edges: PathBuf,
    pub embeddings: PathBuf,
    #[serde(default)]
    pub groups: Option<PathBuf>,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default = "default_pivots")]
    pub pivots: usize,
    #[serde(default)]
    pub seed: u64,
    /// Input name (`concepts`, `edges`, `embeddings`, `groups`) to sha256 hex.
    pub digests: BTreeMap<String, String>,
}

fn default_top_n() -> usize {
    DEFAULT_TOP_N
}

fn default_pivots() -> usize {
    DEFAULT_PIVOTS
}

pub fn sha256_file(path: &Path) -> Result<String, BundleError> {
    let bytes = std::fs::read(path).map_err(|source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl BundleManifest {
    /// A manifest for the given inputs with freshly computed digests. Paths
    /// are stored as given.
    pub fn create(
        concepts: PathBuf,
        edges: PathBuf,
        embeddings: PathBuf,
        groups: Option<PathBuf>,
    ) -> Result<Self, BundleError> {
        let mut m = BundleManifest {
            concepts,
            edges,
            embeddings,
            groups,
            top_n: DEFAULT_TOP_N,
            pivots: DEFAULT_PIVOTS,
            seed: 0,
            digests: BTreeMap::new(),
        };
        m.digests = m
            .inputs(Path::new(""))
            .into_iter()
            .map(|(name, path)| Ok((name.to_string(), sha256_file(&path)?)))
            .collect::<Result<_, BundleError>>()?;
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self, BundleError> {
        let text = std::fs::read_to_string(path).map_err(|source| BundleError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| BundleError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), BundleError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|source| BundleError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    fn inputs(&self, base: &Path) -> Vec<(&'static str, PathBuf)> {
        let mut v = vec![
            ("concepts", base.join(&self.concepts)),
            ("edges", base.join(&self.edges)),
            ("embeddings", base.join(&self.embeddings)),
        ];
        if let Some(g) = &self.groups {
            v.push(("groups", base.join(g)));
        }
        v
    }

    /// Recomputes every input digest against the manifest.
    pub fn verify(&self, base: &Path) -> Result<(), BundleError> {
        for (name, path) in self.inputs(base) {
            let actual = sha256_file(&path)?;
            let expected = self.digests.get(name).cloned().unwrap_or_default();
            if actual != expected {
                return Err(BundleError::DigestMismatch {
                    name: name.to_string(),
                    path,
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }

    pub fn bundle_digest(&self) -> String {
        bundle_digest(&self.digests)
    }
}

pub fn bundle_digest(digests: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (name, d) in digests {
        h.update(format!("{name}={d}\n").as_bytes());
    }
    hex::encode(h.finalize())
}

/// Tuning that does not come from input files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BundleOptions {
    pub top_n: usize,
    pub pivots: usize,
    pub seed: u64,
}

impl Default for BundleOptions {
    fn default() -> Self {
        BundleOptions {
            top_n: DEFAULT_TOP_N,
            pivots: DEFAULT_PIVOTS,
            seed: 0,
        }
    }
}

/// A named direction between two functional groups, or why it is unusable.
#[derive(Debug, Clone)]
pub struct AxisEntry {
    pub name: String,
    pub from_group: String,
    pub to_group: String,
    pub axis: Result<FunctionalAxis, String>,
}

pub fn axis_name(from: &str, to: &str) -> String {
    format!("{from}-{to}")
}

pub struct Bundle {
    pub digest: String,
    pub taxonomy: ConceptTaxonomy,
    pub classification: Classification,
    pub space: EmbeddingSpace,
    pub graph: NavigationGraph,
    pub groups: Vec<FunctionalGroup>,
    pub axes: BTreeMap<String, AxisEntry>,
    pub map2d: Vec<MapPoint>,
    pub options: BundleOptions,
    closeness: OnceLock<Result<CentralityReport, String>>,
    betweenness: OnceLock<Result<CentralityReport, String>>,
}

impl std::fmt::Debug for Bundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bundle")
            .field("digest", &self.digest)
            .field("concepts", &self.taxonomy.len())
            .field("embedded", &self.space.len())
            .field("graph", &self.graph.len())
            .finish()
    }
}

impl Bundle {
    /// Loads the manifest at `path`, checks digests and derives everything.
    pub fn load(path: &Path) -> Result<Self, BundleError> {
        let manifest = BundleManifest::read(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        manifest.verify(base)?;
        let taxonomy = load_taxonomy(base.join(&manifest.concepts), base.join(&manifest.edges))?;
        let space = load_embeddings(base.join(&manifest.embeddings))?;
        let groups = match &manifest.groups {
            Some(g) => {
                let p = base.join(g);
                let text = std::fs::read_to_string(&p).map_err(|source| BundleError::Io { path: p, source })?;
                Some(GroupDef::parse_json(&text)?)
            }
            None => None,
        };
        let options = BundleOptions {
            top_n: manifest.top_n,
            pivots: manifest.pivots,
            seed: manifest.seed,
        };
        Self::from_parts(taxonomy, space, groups, options, manifest.bundle_digest())
    }

    /// Builds a bundle from loaded inputs. Explicit `groups` must resolve;
    /// without them the default groups are tried and dropped if the taxonomy
    /// lacks their disciplines.
    pub fn from_parts(
        taxonomy: ConceptTaxonomy,
        space: EmbeddingSpace,
        groups: Option<Vec<GroupDef>>,
        options: BundleOptions,
        digest: String,
    ) -> Result<Self, BundleError> {
        let classification = classify_all(&taxonomy)?;
        let available = taxonomy.concepts().filter(|c| space.contains(&c.id)).count();
        if available == 0 {
            return Err(BundleError::NoOverlap);
        }
        let top_n = options.top_n.min(available);
        if top_n < options.top_n {
            log::info!("graph limited to {top_n} embedded concepts (requested {})", options.top_n);
        }
        let graph = NavigationGraph::build(&space, &taxonomy, top_n, None)?;

        let groups = match groups {
            Some(defs) => resolve_groups(&defs, &taxonomy, &classification)?,
            None => match resolve_groups(&default_groups(), &taxonomy, &classification) {
                Ok(g) => g,
                Err(e) => {
                    log::warn!("default functional groups unavailable: {e}");
                    Vec::new()
                }
            },
        };
        let mut axes = BTreeMap::new();
        for from in &groups {
            for to in &groups {
                if from.name == to.name {
                    continue;
                }
                let name = axis_name(&from.name, &to.name);
                let axis = build_axis(&space, from, to).map_err(|e| e.to_string());
                axes.insert(
                    name.clone(),
                    AxisEntry {
                        name,
                        from_group: from.name.clone(),
                        to_group: to.name.clone(),
                        axis,
                    },
                );
            }
        }
        let map2d = pca_map(&space, &classification);
        Ok(Bundle {
            digest,
            taxonomy,
            classification,
            space,
            graph,
            groups,
            axes,
            map2d,
            options,
            closeness: OnceLock::new(),
            betweenness: OnceLock::new(),
        })
    }

    /// Centrality over the graph, computed on first use. Betweenness is exact
    /// up to the dense cache limit and pivot-sampled above it.
    pub fn centrality(&self, measure: Measure) -> Result<&CentralityReport, String> {
        let cell = match measure {
            Measure::Closeness => &self.closeness,
            Measure::Betweenness => &self.betweenness,
        };
        cell.get_or_init(|| {
            let report = match measure {
                Measure::Closeness => closeness_centrality(&self.graph),
                Measure::Betweenness => {
                    let n = self.graph.len();
                    let mode = if n <= DEFAULT_CACHE_LIMIT {
                        BetweennessMode::Exact
                    } else {
                        BetweennessMode::Pivots {
                            pivots: self.options.pivots.min(n),
                            seed: self.options.seed,
                        }
                    };
                    betweenness_centrality(&self.graph, mode)
                }
            };
            report.map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(Clone::clone)
    }
}
