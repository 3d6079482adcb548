//! One settings type per artifact-producing command, its flags, and the run.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use sciconnav_core::corpus::{build_trajectories, corpus_stats, IngestOptions};
use sciconnav_core::embed::{load_embeddings, train_sgns_with_summary, write_binary, write_text};
use sciconnav_core::navgraph::{
    betweenness_centrality, centrality_odds_table, closeness_centrality, hl_avgsd_report, pairs_for,
    step_size_histogram, write_centrality_tsv, write_histogram_tsv, write_odds_tsv, BetweennessMode,
    CentralityReport, Measure,
};
use sciconnav_core::semantics::{
    axis_projection_report, build_axis, default_groups, propensity_report, resolve_groups, write_distribution_tsv,
    GroupDef, PropensityMode, PropensityReport,
};
use sciconnav_core::synth::PlantedConfig;
use sciconnav_core::taxonomy::{classify_all, load_taxonomy, partition_concepts, write_classification_tsv};
use sciconnav_core::{ConceptTaxonomy, NavigationGraph, TrainConfig, TrajectoryCorpus};
use sciconnav_service::bundle::{BundleManifest, DEFAULT_PIVOTS, DEFAULT_TOP_N};
use sciconnav_service::queries::{analogy_graph, AnalogyRequest};
use sciconnav_service::MANIFEST_FILE;
use serde::{Deserialize, Serialize};

use crate::config::{absolutize, require, require_str, usage};

pub type Outputs = Vec<(&'static str, PathBuf)>;

/// An artifact-producing command.
pub trait Step: Serialize + for<'de> Deserialize<'de> + Default {
    const NAME: &'static str;
    /// Config table path.
    const SECTION: &'static [&'static str];

    fn out_mut(&mut self) -> &mut Option<PathBuf>;
    /// Checks required settings and makes input paths absolute.
    fn prepare(&mut self) -> Result<()>;
    fn inputs(&self) -> Vec<(&'static str, PathBuf)>;
    fn seed(&self) -> Option<u64> {
        None
    }
    fn run(&self, out: &Path) -> Result<Outputs>;
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create `{}`", path.display()))?,
    ))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn some(inputs: &[(&'static str, &Option<PathBuf>)]) -> Vec<(&'static str, PathBuf)> {
    inputs.iter().filter_map(|(k, p)| p.as_ref().map(|p| (*k, p.clone()))).collect()
}

// ingest

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    /// Works TSV: author_id, work_id, year, concept_ids (pipe-separated).
    #[arg(long)]
    works: Option<PathBuf>,
    /// Keep authors with more than this many works [default: 50].
    #[arg(long)]
    min_pubs: Option<usize>,
    /// Group works by author in memory instead of requiring grouped input.
    #[arg(long)]
    presort: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingest {
    pub works: Option<PathBuf>,
    pub min_pubs: usize,
    pub presort: bool,
    pub out: Option<PathBuf>,
}

impl Default for Ingest {
    fn default() -> Self {
        Ingest {
            works: None,
            min_pubs: 50,
            presort: false,
            out: None,
        }
    }
}

impl Step for Ingest {
    const NAME: &'static str = "ingest";
    const SECTION: &'static [&'static str] = &["ingest"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        require(&self.works, "works")?;
        absolutize(&mut self.works)
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[("works", &self.works)])
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let options = IngestOptions {
            presort: self.presort,
            ..IngestOptions::with_min_pubs(self.min_pubs)
        };
        let corpus = build_trajectories(require(&self.works, "works")?, &options)?;
        let stats = corpus_stats(&corpus);
        log::info!("{} authors, {} tokens, {} concepts", stats.authors, stats.tokens, stats.vocab);
        let corpus_path = out.join("corpus.txt");
        let mut w = create(&corpus_path)?;
        corpus.write(&mut w)?;
        let stats_path = out.join("corpus_stats.json");
        write_json(&stats_path, &stats)?;
        Ok(vec![("corpus", corpus_path), ("stats", stats_path)])
    }
}

// classify

#[derive(Debug, Clone, Args, Serialize)]
pub struct TaxonomyArgs {
    /// Concepts TSV: concept_id, display_name, level, works_count.
    #[arg(long)]
    concepts: Option<PathBuf>,
    /// Edges TSV: child_id, parent_id.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyInputs {
    pub concepts: Option<PathBuf>,
    pub edges: Option<PathBuf>,
}

impl TaxonomyInputs {
    fn prepare(&mut self) -> Result<()> {
        require(&self.concepts, "concepts")?;
        require(&self.edges, "edges")?;
        absolutize(&mut self.concepts)?;
        absolutize(&mut self.edges)
    }

    fn load(&self) -> Result<ConceptTaxonomy> {
        let t = load_taxonomy(require(&self.concepts, "concepts")?, require(&self.edges, "edges")?)?;
        let r = t.report();
        if !r.removed.is_empty() {
            log::warn!("{} concepts reach no root and were removed", r.removed.len());
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    taxonomy: TaxonomyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Classify {
    #[serde(flatten)]
    pub taxonomy: TaxonomyInputs,
    pub out: Option<PathBuf>,
}

impl Step for Classify {
    const NAME: &'static str = "classify";
    const SECTION: &'static [&'static str] = &["classify"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        self.taxonomy.prepare()
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[("concepts", &self.taxonomy.concepts), ("edges", &self.taxonomy.edges)])
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let taxonomy = self.taxonomy.load()?;
        let classification = classify_all(&taxonomy)?;
        let tsv = out.join("classification.tsv");
        write_classification_tsv(&classification, create(&tsv)?)?;
        let partition = partition_concepts(&classification);
        let summary = out.join("classification_summary.json");
        write_json(
            &summary,
            &serde_json::json!({"partition": partition.summary, "load": taxonomy.report()}),
        )?;
        let s = partition.summary;
        println!("S {}  M {}  S+ {}  M- {}  roots {}", s.s, s.m, s.s_plus, s.m_minus, s.roots);
        Ok(vec![("classification", tsv), ("summary", summary)])
    }
}

// train

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Corpus written by `ingest`.
    #[arg(long, conflicts_with = "works")]
    corpus: Option<PathBuf>,
    /// Works TSV, ingested on the fly.
    #[arg(long)]
    works: Option<PathBuf>,
    /// Used with --works [default: 50].
    #[arg(long)]
    min_pubs: Option<usize>,
    /// Vector dimension [default: 24].
    #[arg(long)]
    dim: Option<usize>,
    /// Maximum context radius [default: 5].
    #[arg(long)]
    window: Option<usize>,
    /// Negative samples per example [default: 5].
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Drop tokens seen fewer times [default: 5].
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training threads; only 1 is bit-reproducible [default: 1].
    #[arg(long)]
    workers: Option<usize>,
    /// Write the binary format instead of text.
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Train {
    pub corpus: Option<PathBuf>,
    pub works: Option<PathBuf>,
    pub min_pubs: usize,
    #[serde(flatten)]
    pub train: TrainConfig,
    pub binary: bool,
    pub out: Option<PathBuf>,
}

impl Default for Train {
    fn default() -> Self {
        Train {
            corpus: None,
            works: None,
            min_pubs: 50,
            train: TrainConfig::default(),
            binary: false,
            out: None,
        }
    }
}

impl Step for Train {
    const NAME: &'static str = "train";
    const SECTION: &'static [&'static str] = &["train"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        match (&self.corpus, &self.works) {
            (None, None) => return Err(usage("train needs --corpus or --works")),
            (Some(_), Some(_)) => return Err(usage("give only one of --corpus and --works")),
            _ => {}
        }
        self.train.validate().map_err(|e| usage(e.to_string()))?;
        absolutize(&mut self.corpus)?;
        absolutize(&mut self.works)
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[("corpus", &self.corpus), ("works", &self.works)])
    }

    fn seed(&self) -> Option<u64> {
        Some(self.train.seed)
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let corpus = match (&self.corpus, &self.works) {
            (Some(c), _) => TrajectoryCorpus::load(c)?,
            (None, Some(w)) => build_trajectories(w, &IngestOptions::with_min_pubs(self.min_pubs))?,
            (None, None) => unreachable!("checked in prepare"),
        };
        let (space, summary) = train_sgns_with_summary(&corpus, &self.train)?;
        log::info!(
            "trained {} vectors over {} tokens, final loss {:?}",
            summary.vocab_size,
            summary.training_tokens,
            summary.epoch_loss.last()
        );
        let path = if self.binary {
            let p = out.join("embeddings.bin");
            write_binary(&space, create(&p)?)?;
            p
        } else {
            let p = out.join("embeddings.txt");
            write_text(&space, create(&p)?)?;
            p
        };
        let summary_path = out.join("train_summary.json");
        write_json(&summary_path, &summary)?;
        Ok(vec![("embeddings", path), ("summary", summary_path)])
    }
}

// validate

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    taxonomy: TaxonomyArgs,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Functional groups JSON: {"group": ["discipline", ...]}.
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Group at the negative end of the projection axis.
    #[arg(long, requires = "to")]
    from: Option<String>,
    /// Group at the positive end of the projection axis.
    #[arg(long, requires = "from")]
    to: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Validate {
    #[serde(flatten)]
    pub taxonomy: TaxonomyInputs,
    pub embeddings: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub out: Option<PathBuf>,
}

fn write_radar(reports: &[&PropensityReport], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "mode\tdiscipline\tgroup\tn\tmean\tq5\tq50\tq95")?;
    for r in reports {
        let mode = serde_json::to_value(r.mode)?;
        let mode = mode.as_str().unwrap_or_default();
        for row in &r.per_discipline {
            for (group, s) in [("in", &row.in_group), ("out", &row.out_group)] {
                if let Some(s) = s {
                    writeln!(w, "{mode}\t{}\t{group}\t{}\t{}\t{}\t{}\t{}", row.discipline, s.n, s.mean, s.q5, s.q50, s.q95)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

impl Step for Validate {
    const NAME: &'static str = "validate";
    const SECTION: &'static [&'static str] = &["validate"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        self.taxonomy.prepare()?;
        require(&self.embeddings, "embeddings")?;
        if self.from.is_some() != self.to.is_some() {
            return Err(usage("--from and --to go together"));
        }
        absolutize(&mut self.embeddings)?;
        absolutize(&mut self.groups)
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[
            ("concepts", &self.taxonomy.concepts),
            ("edges", &self.taxonomy.edges),
            ("embeddings", &self.embeddings),
            ("groups", &self.groups),
        ])
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let taxonomy = self.taxonomy.load()?;
        let classification = classify_all(&taxonomy)?;
        let space = load_embeddings(require(&self.embeddings, "embeddings")?)?;
        let classified = propensity_report(&space, &classification, PropensityMode::Classified)?;
        let indistinguishable = propensity_report(&space, &classification, PropensityMode::Indistinguishable)?;
        for r in [&classified, &indistinguishable] {
            match &r.test {
                Some(t) => println!(
                    "{:?}: {} concepts, median shift {:.4}, p = {:.3e}",
                    r.mode, r.concepts, r.median_shift, t.p_value
                ),
                None => println!("{:?}: {} concepts, no test", r.mode, r.concepts),
            }
        }
        let json = out.join("propensity.json");
        write_json(&json, &serde_json::json!({"classified": classified, "indistinguishable": indistinguishable}))?;
        let radar = out.join("radar.tsv");
        write_radar(&[&classified, &indistinguishable], &radar)?;
        let mut outputs = vec![("propensity", json), ("radar", radar)];

        if let (Some(from), Some(to)) = (&self.from, &self.to) {
            let defs = match &self.groups {
                Some(p) => GroupDef::parse_json(&std::fs::read_to_string(p)?)?,
                None => default_groups(),
            };
            let pick = |name: &str| -> Result<GroupDef> {
                defs.iter()
                    .find(|g| g.name == name)
                    .cloned()
                    .ok_or_else(|| usage(format!("unknown group `{name}`")))
            };
            let groups = resolve_groups(&[pick(from)?, pick(to)?], &taxonomy, &classification)?;
            let axis = build_axis(&space, &groups[0], &groups[1])?;
            let report = axis_projection_report(&space, &classification, &axis)?;
            let tsv = out.join("projection.tsv");
            write_distribution_tsv(&report.rows, create(&tsv)?)?;
            let json = out.join("projection.json");
            write_json(&json, &report)?;
            outputs.push(("projection", tsv));
            outputs.push(("projection_json", json));
        }
        Ok(outputs)
    }
}

// analogy

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalogyArgs {
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Starting concept.
    #[arg(long)]
    concept: Option<String>,
    /// Axis start concept.
    #[arg(long)]
    from: Option<String>,
    /// Axis end concept.
    #[arg(long)]
    to: Option<String>,
    /// Step along the axis (the default).
    #[arg(long)]
    pos: bool,
    /// Step against the axis. With --pos, expand both ways.
    #[arg(long)]
    neg: bool,
    /// Number of steps [default: 1].
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analogy {
    pub embeddings: Option<PathBuf>,
    pub concept: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub pos: bool,
    pub neg: bool,
    pub steps: usize,
    pub out: Option<PathBuf>,
}

impl Default for Analogy {
    fn default() -> Self {
        Analogy {
            embeddings: None,
            concept: None,
            from: None,
            to: None,
            pos: false,
            neg: false,
            steps: 1,
            out: None,
        }
    }
}

impl Analogy {
    pub fn request(&self) -> Result<AnalogyRequest> {
        let direction = match (self.pos, self.neg) {
            (true, true) => "both",
            (false, true) => "-",
            _ => "+",
        };
        Ok(AnalogyRequest {
            seed: require_str(&self.concept, "concept")?.to_string(),
            axis_from: require_str(&self.from, "from")?.to_string(),
            axis_to: require_str(&self.to, "to")?.to_string(),
            direction: direction.into(),
            steps: self.steps,
        })
    }
}

impl Step for Analogy {
    const NAME: &'static str = "analogy";
    const SECTION: &'static [&'static str] = &["analogy"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        require(&self.embeddings, "embeddings")?;
        self.request()?;
        absolutize(&mut self.embeddings)
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[("embeddings", &self.embeddings)])
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let space = load_embeddings(require(&self.embeddings, "embeddings")?)?;
        let graph = analogy_graph(&space, &self.request()?).map_err(|e| anyhow::anyhow!(e.message))?;
        for e in &graph.edges {
            println!("{} {} ({} -> {}) = {}  {:.4}", e.from, e.direction, graph.axis_from, graph.axis_to, e.to, e.similarity);
        }
        let path = out.join("analogy.json");
        std::fs::write(&path, serde_json::to_vec(&graph)?)?;
        Ok(vec![("graph", path)])
    }
}

// nav

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    #[command(flatten)]
    #[serde(flatten)]
    taxonomy: TaxonomyArgs,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Graph size: the most-cited embedded concepts [default: 20000].
    #[arg(long)]
    top_n: Option<usize>,
    /// Fail if the selection includes a concept with fewer works.
    #[arg(long)]
    min_works: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInputs {
    #[serde(flatten)]
    pub taxonomy: TaxonomyInputs,
    pub embeddings: Option<PathBuf>,
    pub top_n: usize,
    pub min_works: Option<u64>,
}

impl Default for GraphInputs {
    fn default() -> Self {
        GraphInputs {
            taxonomy: TaxonomyInputs::default(),
            embeddings: None,
            top_n: DEFAULT_TOP_N,
            min_works: None,
        }
    }
}

pub struct LoadedGraph {
    pub taxonomy: ConceptTaxonomy,
    pub graph: NavigationGraph,
}

impl GraphInputs {
    fn prepare(&mut self) -> Result<()> {
        self.taxonomy.prepare()?;
        require(&self.embeddings, "embeddings")?;
        if self.top_n == 0 {
            return Err(usage("--top-n must be positive"));
        }
        absolutize(&mut self.embeddings)
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[
            ("concepts", &self.taxonomy.concepts),
            ("edges", &self.taxonomy.edges),
            ("embeddings", &self.embeddings),
        ])
    }

    /// Builds the graph, shrinking `top_n` to the embedded concepts available.
    pub fn load(&self) -> Result<LoadedGraph> {
        let taxonomy = self.taxonomy.load()?;
        let space = load_embeddings(require(&self.embeddings, "embeddings")?)?;
        let available = taxonomy.concepts().filter(|c| space.contains(&c.id)).count();
        let top_n = self.top_n.min(available);
        if top_n < self.top_n {
            log::warn!("only {available} embedded concepts; graph uses all of them");
        }
        let graph = NavigationGraph::build(&space, &taxonomy, top_n, self.min_works)?;
        log::info!("graph over {} concepts", graph.len());
        Ok(LoadedGraph { taxonomy, graph })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NavPathArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    /// Source concept.
    #[arg(long)]
    from: Option<String>,
    /// Target concept.
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NavPath {
    #[serde(flatten)]
    pub graph: GraphInputs,
    pub from: Option<String>,
    pub to: Option<String>,
    pub out: Option<PathBuf>,
}

impl Step for NavPath {
    const NAME: &'static str = "nav path";
    const SECTION: &'static [&'static str] = &["nav", "path"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        require_str(&self.from, "from")?;
        require_str(&self.to, "to")?;
        self.graph.prepare()
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        self.graph.inputs()
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let g = self.graph.load()?;
        let p = g.graph.shortest_path(require_str(&self.from, "from")?, require_str(&self.to, "to")?)?;
        println!("{}  ({} steps, distance {:.6})", p.nodes.join(" -> "), p.steps, p.distance);
        let path = out.join("path.json");
        write_json(&path, &p)?;
        Ok(vec![("path", path)])
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NavHistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    /// Sampled ordered pairs; every pair when omitted on small graphs.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Above this many ordered pairs an unset `pairs` falls back to sampling.
pub const EXHAUSTIVE_PAIR_LIMIT: usize = 4_000_000;
pub const DEFAULT_SAMPLED_PAIRS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavHist {
    #[serde(flatten)]
    pub graph: GraphInputs,
    pub pairs: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for NavHist {
    fn default() -> Self {
        NavHist {
            graph: GraphInputs::default(),
            pairs: None,
            seed: 1,
            out: None,
        }
    }
}

impl Step for NavHist {
    const NAME: &'static str = "nav hist";
    const SECTION: &'static [&'static str] = &["nav", "hist"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        self.graph.prepare()
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        self.graph.inputs()
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let g = self.graph.load()?;
        let n = g.graph.len();
        let count = self
            .pairs
            .or_else(|| (n * n.saturating_sub(1) > EXHAUSTIVE_PAIR_LIMIT).then_some(DEFAULT_SAMPLED_PAIRS));
        let pairs = pairs_for(n, count, self.seed);
        let h = step_size_histogram(&g.graph, &pairs);
        println!("{} paths, {:.4} under 5 steps", h.total(), h.fraction_below(5));
        let path = out.join("step_histogram.tsv");
        write_histogram_tsv(&h, create(&path)?)?;
        Ok(vec![("histogram", path)])
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CentralityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    graph: GraphArgs,
    /// closeness or betweenness [default: closeness].
    #[arg(long)]
    measure: Option<Measure>,
    /// Betweenness from this many sampled sources instead of all.
    #[arg(long)]
    pivots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityInputs {
    #[serde(flatten)]
    pub graph: GraphInputs,
    pub measure: Measure,
    pub pivots: Option<usize>,
    pub seed: u64,
}

impl Default for CentralityInputs {
    fn default() -> Self {
        CentralityInputs {
            graph: GraphInputs::default(),
            measure: Measure::Closeness,
            pivots: None,
            seed: 1,
        }
    }
}

impl CentralityInputs {
    fn compute(&self, g: &LoadedGraph) -> Result<CentralityReport> {
        Ok(match self.measure {
            Measure::Closeness => closeness_centrality(&g.graph)?,
            Measure::Betweenness => {
                let mode = match self.pivots {
                    Some(p) => BetweennessMode::Pivots {
                        pivots: p,
                        seed: self.seed,
                    },
                    None => BetweennessMode::Exact,
                };
                betweenness_centrality(&g.graph, mode)?
            }
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NavCentralityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    centrality: CentralityArgs,
    /// Also report AvgSD among the top and bottom K concepts.
    #[arg(long)]
    hl: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NavCentrality {
    #[serde(flatten)]
    pub centrality: CentralityInputs,
    pub hl: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Step for NavCentrality {
    const NAME: &'static str = "nav centrality";
    const SECTION: &'static [&'static str] = &["nav", "centrality"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        self.centrality.graph.prepare()
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        self.centrality.graph.inputs()
    }

    fn seed(&self) -> Option<u64> {
        Some(self.centrality.seed)
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let g = self.centrality.graph.load()?;
        let report = self.centrality.compute(&g)?;
        let m = self.centrality.measure;
        let path = out.join(format!("centrality_{m}.tsv"));
        write_centrality_tsv(&report, create(&path)?)?;
        let mut outputs = vec![("centrality", path)];
        if let Some(k) = self.hl {
            let hl = hl_avgsd_report(&g.graph, &report, k)?;
            println!(
                "mean AvgSD  H->H {:.4}  H->L {:.4}  L->L {:.4}",
                hl.summary_h_to_h.mean, hl.summary_h_to_l.mean, hl.summary_l_to_l.mean
            );
            let p = out.join(format!("hl_avgsd_{m}.json"));
            write_json(&p, &hl)?;
            outputs.push(("hl_avgsd", p));
        }
        Ok(outputs)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NavOddsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    centrality: CentralityArgs,
    /// Top-k cutoffs [default: 200,500,1000,1500,2000].
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavOdds {
    #[serde(flatten)]
    pub centrality: CentralityInputs,
    pub ks: Vec<usize>,
    pub out: Option<PathBuf>,
}

impl Default for NavOdds {
    fn default() -> Self {
        NavOdds {
            centrality: CentralityInputs::default(),
            ks: sciconnav_service::queries::DEFAULT_ODDS_KS.to_vec(),
            out: None,
        }
    }
}

impl Step for NavOdds {
    const NAME: &'static str = "nav odds";
    const SECTION: &'static [&'static str] = &["nav", "odds"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(usage("--ks must list positive cutoffs"));
        }
        self.centrality.graph.prepare()
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        self.centrality.graph.inputs()
    }

    fn seed(&self) -> Option<u64> {
        Some(self.centrality.seed)
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let g = self.centrality.graph.load()?;
        let report = self.centrality.compute(&g)?;
        let classification = classify_all(&g.taxonomy)?;
        let rows = centrality_odds_table(&report, &classification, &self.ks);
        let m = self.centrality.measure;
        let path = out.join(format!("odds_{m}.tsv"));
        write_odds_tsv(m, &rows, create(&path)?)?;
        write_odds_tsv(m, &rows, std::io::stdout().lock())?;
        Ok(vec![("odds", path)])
    }
}

// bundle

#[derive(Debug, Clone, Args, Serialize)]
pub struct BundleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    taxonomy: TaxonomyArgs,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Graph size served [default: 20000].
    #[arg(long)]
    top_n: Option<usize>,
    /// Betweenness pivots for graphs too large for the exact pass [default: 256].
    #[arg(long)]
    pivots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakeBundle {
    #[serde(flatten)]
    pub taxonomy: TaxonomyInputs,
    pub embeddings: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub top_n: usize,
    pub pivots: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for MakeBundle {
    fn default() -> Self {
        MakeBundle {
            taxonomy: TaxonomyInputs::default(),
            embeddings: None,
            groups: None,
            top_n: DEFAULT_TOP_N,
            pivots: DEFAULT_PIVOTS,
            seed: 0,
            out: None,
        }
    }
}

impl Step for MakeBundle {
    const NAME: &'static str = "bundle";
    const SECTION: &'static [&'static str] = &["bundle"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        self.taxonomy.prepare()?;
        require(&self.embeddings, "embeddings")?;
        absolutize(&mut self.embeddings)?;
        absolutize(&mut self.groups)
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        some(&[
            ("concepts", &self.taxonomy.concepts),
            ("edges", &self.taxonomy.edges),
            ("embeddings", &self.embeddings),
            ("groups", &self.groups),
        ])
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let mut m = BundleManifest::create(
            require(&self.taxonomy.concepts, "concepts")?.to_path_buf(),
            require(&self.taxonomy.edges, "edges")?.to_path_buf(),
            require(&self.embeddings, "embeddings")?.to_path_buf(),
            self.groups.clone(),
        )?;
        m.top_n = self.top_n;
        m.pivots = self.pivots;
        m.seed = self.seed;
        let path = out.join(MANIFEST_FILE);
        m.write(&path)?;
        println!("bundle {}", m.bundle_digest());
        Ok(vec![("bundle", path)])
    }
}

// synth

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    authors: Option<usize>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    cluster_size: Option<usize>,
    #[arg(long)]
    works_per_author: Option<usize>,
    #[arg(long)]
    concepts_per_work: Option<usize>,
    /// Probability that a token comes from the author's own cluster.
    #[arg(long)]
    in_cluster: Option<f64>,
    /// Concepts under every cluster root.
    #[arg(long)]
    bridges: Option<usize>,
    #[arg(long)]
    bridge_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Synth {
    #[serde(flatten)]
    pub planted: PlantedConfig,
    pub out: Option<PathBuf>,
}

impl Step for Synth {
    const NAME: &'static str = "synth";
    const SECTION: &'static [&'static str] = &["synth"];

    fn out_mut(&mut self) -> &mut Option<PathBuf> {
        &mut self.out
    }

    fn prepare(&mut self) -> Result<()> {
        let p = &self.planted;
        if p.clusters == 0 || p.clusters > 23 || p.cluster_size < 2 || p.authors == 0 {
            return Err(usage("synth needs 1..=23 clusters of at least 2 concepts and some authors"));
        }
        Ok(())
    }

    fn inputs(&self) -> Vec<(&'static str, PathBuf)> {
        Vec::new()
    }

    fn seed(&self) -> Option<u64> {
        Some(self.planted.seed)
    }

    fn run(&self, out: &Path) -> Result<Outputs> {
        let data = self.planted.generate();
        let works = out.join("works.tsv");
        data.write_works_tsv(create(&works)?)?;
        let concepts = out.join("concepts.tsv");
        data.write_concepts_tsv(create(&concepts)?)?;
        let edges = out.join("edges.tsv");
        data.write_edges_tsv(create(&edges)?)?;
        Ok(vec![("works", works), ("concepts", concepts), ("edges", edges)])
    }
}
