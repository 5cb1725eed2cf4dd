use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "posehsmm", version, about = "Sleep-pose HSMM pipeline: simulate, train, decode, summarize, evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a labelled pose sequence: writes a stream and a ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Sample rotation clips for every (from, to, direction) plus a clip manifest.
    SimulateTransitions(SimulateTransitionsArgs),
    /// Fit an HSMM to labelled streams.
    Train(TrainArgs),
    /// Build a transition library from a clip manifest.
    TrainLibrary(TrainLibraryArgs),
    /// Most probable segmentation of a stream.
    Decode(DecodeArgs),
    /// Windowed pose history of a stream (decoded) or of a label file.
    Summarize(SummarizeArgs),
    /// Keyframes of one transition clip.
    Keyframes(KeyframesArgs),
    /// Classify the rotation in one clip against a library.
    ClassifyTransition(ClassifyArgs),
    /// Compare predictions with ground truth.
    Evaluate(EvaluateArgs),
}

/// Where a scenario comes from.
#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Built-in scenario (`bc-sim` or `do-sim`).
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Scenario TOML: a path, or a name looked up as `<name>.toml` in the
    /// config directory (`$POSEHSMM_CONFIG_DIR`, default `./configs`).
    #[arg(long)]
    pub config: Option<String>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Switch scene once in the middle of the sequence.
    #[arg(long)]
    pub scene_switch: bool,
    /// Print the resolved scenario as TOML instead of simulating.
    #[arg(long)]
    pub print_config: bool,
    /// Stream file to write.
    #[arg(long, required_unless_present = "print_config")]
    pub out: Option<PathBuf>,
    /// Ground-truth sidecar (default: `<out>.truth`).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateTransitionsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Clips per combination; clip `k` of combination `i` uses seed `seed + 200 k + i`.
    #[arg(long, default_value_t = 1)]
    pub clips_per_combination: usize,
    /// Directory for the clip streams and `clips.manifest`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitialArg {
    /// Literature prior table renormalized over the states.
    Prior,
    /// First-segment frequencies of the training data.
    Empirical,
    Uniform,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training streams (repeatable, paired in order with --labels).
    #[arg(long = "stream", required = true)]
    pub streams: Vec<PathBuf>,
    /// Label files (truth or segmentation), one per stream.
    #[arg(long = "labels", required = true)]
    pub labels: Vec<PathBuf>,
    #[arg(long)]
    pub out_model: PathBuf,
    /// Maximum duration (default: three times the largest mean, capped at the longest stream).
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Threshold features at 0.5 before fitting and scoring.
    #[arg(long)]
    pub binarize: bool,
    #[arg(long, value_enum, default_value_t = InitialArg::Prior)]
    pub initial: InitialArg,
}

/// Keyframe selection parameters.
#[derive(Debug, Clone, Copy, Args)]
pub struct KeyframeArgs {
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
    /// Minimum endpoint dissimilarity.
    #[arg(long, default_value_t = 0.8)]
    pub th: f64,
    /// Interior frames must score at least this fraction of the best one.
    #[arg(long, default_value_t = 0.8)]
    pub ratio: f64,
}

#[derive(Debug, Args)]
pub struct TrainLibraryArgs {
    /// Clip manifest (`kind: clips`).
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub keyframes: KeyframeArgs,
    /// Match chains against every frame instead of the keyframes only.
    #[arg(long)]
    pub full_rate: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub stream: PathBuf,
    /// Score the last segment as possibly unfinished.
    #[arg(long)]
    pub censored: bool,
    /// Segmentation file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// History window parameters.
#[derive(Debug, Clone, Copy, Args)]
pub struct HistoryArgs {
    /// Use every n-th tick of a window.
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
    /// Window length in ticks.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Minimum modal fraction for a window to keep its pose.
    #[arg(long, default_value_t = 0.8)]
    pub consistency: f64,
    /// Seconds per tick, for the time column.
    #[arg(long, default_value_t = 1.0)]
    pub tick_seconds: f64,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    /// Stream to decode (requires --model).
    #[arg(long, requires = "model", conflicts_with = "labels")]
    pub stream: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Label file to summarize directly.
    #[arg(long, required_unless_present = "stream")]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub history: HistoryArgs,
    /// History file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KeyframesArgs {
    #[arg(long)]
    pub clip: PathBuf,
    #[command(flatten)]
    pub keyframes: KeyframeArgs,
    /// Keyframe file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub clip: PathBuf,
    #[arg(long)]
    pub library: PathBuf,
    /// Transition file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground-truth label files (repeatable, paired in order with --pred).
    #[arg(long = "truth", requires = "preds")]
    pub truths: Vec<PathBuf>,
    /// Predicted segmentations.
    #[arg(long = "pred")]
    pub preds: Vec<PathBuf>,
    /// Model that produced the predictions; with --stream, scores are re-checked.
    #[arg(long, requires = "streams")]
    pub model: Option<PathBuf>,
    /// Streams the predictions were decoded from, one per pair.
    #[arg(long = "stream")]
    pub streams: Vec<PathBuf>,
    /// Clip manifest to classify against --library.
    #[arg(long, requires = "library")]
    pub clips: Option<PathBuf>,
    #[arg(long)]
    pub library: Option<PathBuf>,
    #[command(flatten)]
    pub history: HistoryArgs,
    /// Also write the machine-readable records here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
