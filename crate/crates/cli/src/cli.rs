//! Command-line definitions.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use hashreuse_core::recommend::{Algorithm, MixNormalization};

use crate::io::Format;

#[derive(Debug, Parser)]
#[command(
    name = "hashreuse",
    version,
    about = "Hashtag reuse analysis and hashtag recommender benchmarking"
)]
pub struct Cli {
    /// key = value file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel stages (0 = all cores). Never changes
    /// output bytes.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset size summary.
    Stats(DataArgs),
    /// Label every seed-user hashtag assignment by reuse source.
    Classify(ClassifyArgs),
    /// Recency histograms of individual and social reuse.
    Recency(RecencyArgs),
    /// Recommend hashtags for one user at one point in time.
    Recommend(RecommendArgs),
    /// Leave-latest-out precision/recall of the recommenders.
    Evaluate(EvaluateArgs),
    /// Write a synthetic corpus with ground-truth reuse sources.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Hashtag assignments file.
    #[arg(long, value_name = "FILE")]
    pub assignments: Option<PathBuf>,
    /// Follow network TSV (seed \t followee).
    #[arg(long, value_name = "FILE")]
    pub network: Option<PathBuf>,
    /// Assignments file format [default: tsv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Skip and count malformed lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Also write outputs into this directory.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Write per-assignment labels to labels.tsv (needs --out-dir).
    #[arg(long)]
    pub labels: bool,
}

#[derive(Debug, Args)]
pub struct RecencyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of log-spaced bins [default: 50].
    #[arg(long)]
    pub bins: Option<usize>,
    /// Lower histogram edge in hours [default: 0.1].
    #[arg(long)]
    pub min_hours: Option<f64>,
    /// Upper histogram edge in hours [default: 10000].
    #[arg(long)]
    pub max_hours: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// BLL decay exponent [default: 0.5].
    #[arg(long)]
    pub d: Option<f64>,
    /// Lower clamp on usage age in seconds [default: 1].
    #[arg(long)]
    pub min_delta: Option<u64>,
    /// Weight of the individual component in bll_is [default: 0.5].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Rescaling of the bll_is components: softmax or minmax
    /// [default: softmax].
    #[arg(long, value_parser = parse_mix)]
    pub mix_norm: Option<MixNormalization>,
    /// Neighbours for cf [default: 20].
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Re-rank candidates; the only mode is `hybrid` [default: none].
    #[arg(long)]
    pub rerank: Option<String>,
    /// Accuracy weight of the hybrid re-ranker [default: 0.7].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Candidates fetched before re-ranking [default: 50].
    #[arg(long)]
    pub candidates: Option<usize>,
}

fn parse_mix(s: &str) -> Result<MixNormalization, String> {
    s.parse().map_err(|e: hashreuse_core::recommend::BllError| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: hashreuse_core::recommend::UnknownAlgorithm| e.to_string())
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// bll_i, bll_s, bll_is, cf or mp [default: bll_is].
    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Option<Algorithm>,
    /// User id to recommend for.
    #[arg(long)]
    pub user: Option<String>,
    /// Reference time (unix seconds); only earlier usages are visible.
    #[arg(long)]
    pub at: Option<i64>,
    /// List length [default: 10].
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated algorithms [default: bll_i,bll_s,bll_is,cf,mp].
    #[arg(long)]
    pub algos: Option<String>,
    /// Largest k reported [default: 10].
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Report intra-list diversity and serendipity (implied by --rerank).
    #[arg(long)]
    pub beyond_accuracy: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory receiving the corpus, network and ground truth.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub n_seed_users: Option<usize>,
    #[arg(long)]
    pub n_followees_per_seed: Option<usize>,
    #[arg(long)]
    pub n_background_users: Option<usize>,
    #[arg(long)]
    pub vocab_size: Option<usize>,
    #[arg(long)]
    pub n_tweets_per_user: Option<usize>,
    #[arg(long)]
    pub max_hashtags_per_tweet: Option<usize>,
    #[arg(long)]
    pub p_individual: Option<f64>,
    #[arg(long)]
    pub p_social: Option<f64>,
    #[arg(long)]
    pub p_network: Option<f64>,
    #[arg(long)]
    pub p_external: Option<f64>,
    #[arg(long)]
    pub recency_exponent: Option<f64>,
    #[arg(long)]
    pub daily_amplitude: Option<f64>,
    #[arg(long)]
    pub active_window_hours: Option<f64>,
    #[arg(long)]
    pub mean_gap_hours: Option<f64>,
    #[arg(long)]
    pub start_time: Option<i64>,
}
