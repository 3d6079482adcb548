//! `sciconnav`: build, analyse and serve a concept navigation space.

mod commands;
mod config;
mod manifest;

use std::collections::BTreeMap;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::*;
use config::{data_dir, load_config, resolve, UsageError};
use manifest::{FileDigest, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "sciconnav", version, about, arg_required_else_help = true)]
struct Cli {
    /// TOML file with one table per command; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build author trajectories from a works file.
    Ingest(IngestArgs),
    /// Label every concept with a discipline.
    Classify(ClassifyArgs),
    /// Train concept vectors on trajectories.
    Train(TrainArgs),
    /// Discipline propensity checks and functional-axis projections.
    Validate(ValidateArgs),
    /// Step from a concept along the direction between two others.
    Analogy(AnalogyArgs),
    /// Shortest paths and centrality on the concept graph.
    #[command(subcommand)]
    Nav(NavCommand),
    /// Pin inputs and their digests into a bundle for `serve`.
    Bundle(BundleArgs),
    /// Serve the JSON API over a bundle.
    Serve(ServeArgs),
    /// Write a planted-cluster dataset.
    Synth(SynthArgs),
    /// Re-run a command from its manifest and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
enum NavCommand {
    /// Shortest path between two concepts.
    Path(NavPathArgs),
    /// Histogram of path step counts.
    Hist(NavHistArgs),
    /// Closeness or betweenness of every node.
    Centrality(NavCentralityArgs),
    /// Multi- versus single-root odds among top-ranked nodes.
    Odds(NavOddsArgs),
}

#[derive(Debug, Args, Serialize)]
struct ServeArgs {
    /// bundle.json, or a directory holding one [default: $SCICONNAV_DATA_DIR/bundle.json].
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long)]
    host: Option<IpAddr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
struct Serve {
    bundle: Option<PathBuf>,
    port: u16,
    host: IpAddr,
}

impl Default for Serve {
    fn default() -> Self {
        Serve {
            bundle: None,
            port: 8080,
            host: IpAddr::from([127, 0, 0, 1]),
        }
    }
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// A `*.manifest.json` written by an earlier run.
    manifest: PathBuf,
    /// Where to write the new outputs [default: `replay/` beside the manifest].
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Resolves settings, runs the command and writes its manifest.
fn execute<S: Step>(mut step: S) -> Result<RunManifest> {
    step.prepare()?;
    let out = step.out_mut().get_or_insert_with(data_dir).clone();
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create `{}`", out.display()))?;
    let out = std::path::absolute(&out)?;
    *step.out_mut() = Some(out.clone());
    let inputs = digests(step.inputs())?;
    let outputs = digests(step.run(&out)?)?;
    let manifest = RunManifest {
        command: S::NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(&step)?,
        inputs,
        outputs,
        seed: step.seed(),
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    let path = manifest.write(&out)?;
    log::info!("manifest written to {}", path.display());
    Ok(manifest)
}

fn digests(files: Vec<(&'static str, PathBuf)>) -> Result<BTreeMap<String, FileDigest>> {
    files
        .into_iter()
        .map(|(name, p)| Ok((name.to_string(), FileDigest::of(&p)?)))
        .collect()
}

fn run_step<S: Step>(config: Option<&toml::Table>, flags: &impl Serialize) -> Result<()> {
    execute(resolve::<S>(S::SECTION, config, flags)?).map(drop)
}

fn replay_as<S: Step>(recorded: &RunManifest, out: PathBuf) -> Result<bool> {
    let mut step: S = serde_json::from_value(recorded.config.clone()).context("manifest config does not fit its command")?;
    for (name, d) in &recorded.inputs {
        let now = FileDigest::of(&d.path)?;
        if now.sha256 != d.sha256 {
            bail!("input {name} (`{}`) changed since the recorded run", d.path.display());
        }
    }
    *step.out_mut() = Some(out);
    let fresh = execute(step)?;
    let mut same = fresh.outputs.len() == recorded.outputs.len();
    for (name, d) in &recorded.outputs {
        let status = match fresh.outputs.get(name) {
            Some(f) if f.sha256 == d.sha256 => "identical",
            Some(_) => {
                same = false;
                "DIFFERENT"
            }
            None => {
                same = false;
                "MISSING"
            }
        };
        println!("{name}\t{status}\t{}", d.path.display());
    }
    Ok(same)
}

fn replay(args: &ReplayArgs) -> Result<()> {
    let recorded = RunManifest::read(&args.manifest)?;
    let out = match &args.out {
        Some(o) => o.clone(),
        None => args.manifest.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    let same = match recorded.command.as_str() {
        Ingest::NAME => replay_as::<Ingest>(&recorded, out)?,
        Classify::NAME => replay_as::<Classify>(&recorded, out)?,
        Train::NAME => replay_as::<Train>(&recorded, out)?,
        Validate::NAME => replay_as::<Validate>(&recorded, out)?,
        Analogy::NAME => replay_as::<Analogy>(&recorded, out)?,
        NavPath::NAME => replay_as::<NavPath>(&recorded, out)?,
        NavHist::NAME => replay_as::<NavHist>(&recorded, out)?,
        NavCentrality::NAME => replay_as::<NavCentrality>(&recorded, out)?,
        NavOdds::NAME => replay_as::<NavOdds>(&recorded, out)?,
        MakeBundle::NAME => replay_as::<MakeBundle>(&recorded, out)?,
        Synth::NAME => replay_as::<Synth>(&recorded, out)?,
        other => bail!("cannot replay unknown command `{other}`"),
    };
    if !same {
        bail!("replayed outputs differ from the manifest");
    }
    Ok(())
}

fn serve(config: Option<&toml::Table>, flags: &ServeArgs) -> Result<()> {
    let s: Serve = resolve(&["serve"], config, flags)?;
    let mut path = s.bundle.clone().unwrap_or_else(data_dir);
    if path.is_dir() {
        path = path.join(sciconnav_service::MANIFEST_FILE);
    }
    let state = sciconnav_service::AppState::from_manifest(path)?;
    let addr = SocketAddr::new(s.host, s.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(sciconnav_service::serve(state, addr))
        .with_context(|| format!("cannot serve on {addr}"))
}

fn run(cli: Cli) -> Result<()> {
    let table = load_config(cli.config.as_deref())?;
    let config = table.as_ref();
    match &cli.command {
        Command::Ingest(a) => run_step::<Ingest>(config, a),
        Command::Classify(a) => run_step::<Classify>(config, a),
        Command::Train(a) => run_step::<Train>(config, a),
        Command::Validate(a) => run_step::<Validate>(config, a),
        Command::Analogy(a) => run_step::<Analogy>(config, a),
        Command::Nav(NavCommand::Path(a)) => run_step::<NavPath>(config, a),
        Command::Nav(NavCommand::Hist(a)) => run_step::<NavHist>(config, a),
        Command::Nav(NavCommand::Centrality(a)) => run_step::<NavCentrality>(config, a),
        Command::Nav(NavCommand::Odds(a)) => run_step::<NavOdds>(config, a),
        Command::Bundle(a) => run_step::<MakeBundle>(config, a),
        Command::Synth(a) => run_step::<Synth>(config, a),
        Command::Serve(a) => serve(config, a),
        Command::Replay(a) => replay(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("run `sciconnav --help` for usage");
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
