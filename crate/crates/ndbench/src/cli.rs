//! Argument parsing. Every verb flag maps onto the setting of the same name
//! (`--knn-per-query` → `knn_per_query`); flags override the config file.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::commands::{
    cmd_aggregate, cmd_fixture, cmd_gist, cmd_index, cmd_mine, cmd_pca_train, cmd_pipeline, cmd_project, cmd_roc,
    cmd_simulate,
};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::run::Run;

#[derive(Debug, Parser)]
#[command(name = "ndbench", version, about = "Near-duplicate image detection benchmark")]
pub struct Cli {
    /// Flat key=value settings file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for synthetic data.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: hardware parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// GIST descriptors for the images of a manifest CSV (id,path,md5).
    Gist(GistArgs),
    /// SPoC or R-MAC descriptors from a directory of feature maps.
    Aggregate(AggregateArgs),
    /// Train a whitening PCA model on a descriptor matrix.
    PcaTrain(PcaArgs),
    /// Exact kNN or range search of a query matrix against a database matrix.
    Index(IndexArgs),
    /// Mine hard negatives between a query list and a pool list.
    Mine(MineArgs),
    /// ROC curve and AUC of mined negatives against labeled positives.
    Roc(RocArgs),
    /// Query simulation at fixed or ROC-picked thresholds.
    Simulate(SimulateArgs),
    /// Specificity floor and projected FP rates of benchmark designs.
    Project(ProjectArgs),
    /// Mine, evaluate, simulate and project in one run.
    Pipeline(PipelineArgs),
    /// Write the synthetic fixture dataset and its pipeline config.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct GistArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    image_side: Option<usize>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    orientations: Option<usize>,
    /// mean | energy
    #[arg(long)]
    pooling: Option<String>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Directory of .ndfm feature maps.
    #[arg(long)]
    maps: Option<PathBuf>,
    /// spoc | rmac
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    pca: Option<PathBuf>,
    #[arg(long)]
    max_scale: Option<usize>,
    #[arg(long)]
    overlap: Option<f64>,
    /// Keep negative activations instead of rejecting them.
    #[arg(long)]
    signed: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long)]
    descriptors: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Distance threshold; switches to range search.
    #[arg(long)]
    range: Option<f32>,
    /// Result cap for range search, or "none".
    #[arg(long)]
    cap: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[arg(long)]
    descriptors: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    pool: Option<PathBuf>,
    /// hn1 | hn2
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    knn_per_query: Option<usize>,
    #[arg(long)]
    total_pairs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the mined pairs as an NND-labeled pairs file.
    #[arg(long)]
    review: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[arg(long)]
    descriptors: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    mined: Option<PathBuf>,
    #[arg(long)]
    relabel: Option<PathBuf>,
    /// all | ind
    #[arg(long)]
    mode: Option<String>,
    /// Evenly spaced thresholds instead of every distinct score.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    descriptors: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    distractors: Option<PathBuf>,
    /// Comma-separated distance thresholds.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    mined: Option<PathBuf>,
    #[arg(long)]
    relabel: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated FP rates on the mined set.
    #[arg(long)]
    fp_rates: Option<String>,
    /// Comma-separated result caps; "none" is uncapped.
    #[arg(long)]
    caps: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    fp_counts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    fp_rates: Option<String>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    descriptors: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    distractors: Option<PathBuf>,
    #[arg(long)]
    relabel: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    knn_per_query: Option<usize>,
    #[arg(long)]
    total_pairs: Option<usize>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    fp_rates: Option<String>,
    #[arg(long)]
    caps: Option<String>,
    #[arg(long)]
    bound_check: Option<bool>,
    #[arg(long)]
    bound_max_pairs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n_pool: Option<usize>,
    #[arg(long)]
    n_queries: Option<usize>,
    #[arg(long)]
    n_clusters: Option<usize>,
    #[arg(long)]
    ind_noise: Option<f64>,
    #[arg(long)]
    nind_noise: Option<f64>,
    #[arg(long)]
    total_pairs: Option<usize>,
}

/// Copies every flag of `cmd` given on the command line into `params`.
fn overlay(params: &mut Params, cmd: &clap::Command, m: &ArgMatches) {
    for arg in cmd.get_arguments() {
        let id = arg.get_id().as_str();
        if m.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Ok(Some(values)) = m.try_get_raw(id) {
            let joined: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
            params.set(id, joined.join(","));
        }
    }
}

/// Parses `args` (program name first), builds the settings and runs the verb.
pub fn run<I, T>(args: I) -> CliResult<Run>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = Cli::command();
    let matches = match command.clone().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => return Err(CliError::Input(e.to_string().trim_end().to_string())),
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Input(e.to_string()))?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let sub_command = command.find_subcommand(name).expect("parsed subcommand exists");

    let mut params = match &cli.config {
        Some(path) => Params::from_config_file(path)?,
        None => Params::new(),
    };
    overlay(&mut params, &command, &matches);
    overlay(&mut params, sub_command, sub);

    if let Some(n) = params.get("threads").map(|_| params.parse_or("threads", 0usize)).transpose()? {
        if n == 0 {
            return Err(CliError::Input("`threads` must be >= 1".into()));
        }
        // fails only if the pool already exists, e.g. a second call in one process
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::warn!("thread pool already initialized; `threads` ignored");
        }
    }

    match cli.command {
        Command::Gist(_) => cmd_gist(&params),
        Command::Aggregate(_) => cmd_aggregate(&params),
        Command::PcaTrain(_) => cmd_pca_train(&params),
        Command::Index(_) => cmd_index(&params),
        Command::Mine(_) => cmd_mine(&params),
        Command::Roc(_) => cmd_roc(&params),
        Command::Simulate(_) => cmd_simulate(&params),
        Command::Project(_) => cmd_project(&params),
        Command::Pipeline(_) => cmd_pipeline(&params),
        Command::Fixture(_) => cmd_fixture(&params),
    }
}
