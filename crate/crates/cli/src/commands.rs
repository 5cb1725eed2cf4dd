use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use posehsmm::inference::InitialSource;
use posehsmm::io::{
    load_labels, load_library, load_model, load_stream, read_clip_manifest, save_library, save_model,
    save_segmentation, save_stream, save_truth, write_clip_manifest, write_history, write_keyframes,
    write_segmentation, write_transition, ClipEntry, LabelTrack,
};
use posehsmm::simulator::transition_combinations;
use posehsmm::summarizer::{state_tracks, ChainInput};
use posehsmm::{
    build_transition_library, classify_transition, hsmm_viterbi, sample_sequence, sample_transition_clip,
    select_keyframes, summarize_history, summarize_labels, Error, FeatureStream, FinalSegment, HistoryParams,
    KeyframeParams, ScenarioConfig, TrainOptions,
};

use crate::cli::{
    ClassifyArgs, DecodeArgs, HistoryArgs, InitialArg, KeyframeArgs, KeyframesArgs, ScenarioArgs, SimulateArgs,
    SimulateTransitionsArgs, SummarizeArgs, TrainArgs, TrainLibraryArgs,
};

/// Environment variable naming the directory searched for `<name>.toml`.
pub const CONFIG_DIR_ENV: &str = "POSEHSMM_CONFIG_DIR";
const DEFAULT_CONFIG_DIR: &str = "configs";
const MANIFEST_NAME: &str = "clips.manifest";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable input.
    Usage(String),
    Core(Error),
}

impl CliError {
    /// 2 for usage and input errors, 3 when inference finds nothing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NoFeasiblePath | Error::NoTransitionDetected) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Runs a loader, naming the file in any error.
pub fn load<T>(path: &Path, loader: impl Fn(&Path) -> posehsmm::Result<T>) -> Result<T, CliError> {
    loader(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Writes to `out`, or to stdout when no path was given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| usage(format!("stdout: {e}"))),
    }
}

fn config_dir() -> PathBuf {
    std::env::var_os(CONFIG_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_CONFIG_DIR), PathBuf::from)
}

fn scenario(args: &ScenarioArgs) -> Result<ScenarioConfig, CliError> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), None) => ScenarioConfig::preset(name).ok_or_else(|| {
            usage(format!("unknown preset `{name}` (expected one of {})", ScenarioConfig::PRESET_NAMES.join(", ")))
        })?,
        (None, Some(spec)) => {
            let direct = PathBuf::from(spec);
            let path = if direct.is_file() { direct } else { config_dir().join(format!("{spec}.toml")) };
            let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        _ => return Err(usage("pass exactly one of --preset or --config")),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn keyframe_params(args: &KeyframeArgs) -> KeyframeParams {
    KeyframeParams { k_max: args.k_max, endpoint_threshold: args.th, ratio_threshold: args.ratio }
}

pub fn history_params(args: &HistoryArgs) -> Result<HistoryParams, CliError> {
    if !(args.tick_seconds.is_finite() && args.tick_seconds > 0.0) {
        return Err(usage("--tick-seconds must be positive"));
    }
    Ok(HistoryParams { sample_every: args.sample_every, window: args.window, consistency: args.consistency })
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut config = scenario(&args.scenario)?;
    config.scene_switch |= args.scene_switch;
    if args.print_config {
        let text = toml::to_string(&config).map_err(|e| usage(format!("cannot render config: {e}")))?;
        return emit(None, &text);
    }
    let out = args.out.as_deref().ok_or_else(|| usage("--out is required"))?;
    let truth_path = args.truth.clone().unwrap_or_else(|| sidecar(out));
    let (stream, truth) = sample_sequence(&config)?;
    save_stream(&stream, out)?;
    let track = LabelTrack {
        states: truth.states,
        segmentation: truth.segmentation,
        scene_track: Some(truth.scene_track),
        log_prob: None,
    };
    save_truth(&track, &truth_path)?;
    Ok(())
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".truth");
    PathBuf::from(name)
}

pub fn simulate_transitions(args: &SimulateTransitionsArgs) -> Result<(), CliError> {
    let config = scenario(&args.scenario)?;
    if args.clips_per_combination == 0 {
        return Err(usage("--clips-per-combination must be at least 1"));
    }
    fs::create_dir_all(&args.out_dir).map_err(|e| usage(format!("{}: {e}", args.out_dir.display())))?;
    let combos = transition_combinations();
    let mut entries = Vec::with_capacity(combos.len() * args.clips_per_combination);
    for k in 0..args.clips_per_combination {
        for (i, &(from, to, direction)) in combos.iter().enumerate() {
            let seed = config.seed.wrapping_add((k * combos.len() + i) as u64);
            let (clip, _) = sample_transition_clip(from, to, direction, &config.clone().with_seed(seed))?;
            let name = format!("clip_{k:02}_{i:03}_{from}_{to}_{direction}.stream");
            save_stream(&clip, &args.out_dir.join(&name))?;
            entries.push(ClipEntry { path: name, from, to, direction });
        }
    }
    emit(Some(&args.out_dir.join(MANIFEST_NAME)), &write_clip_manifest(&entries))
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    if args.streams.len() != args.labels.len() {
        return Err(usage(format!("{} streams but {} label files", args.streams.len(), args.labels.len())));
    }
    let streams: Vec<FeatureStream> = args.streams.iter().map(|p| load(p, load_stream)).collect::<Result<_, _>>()?;
    let tracks: Vec<LabelTrack> = args.labels.iter().map(|p| load(p, load_labels)).collect::<Result<_, _>>()?;
    let states = tracks[0].states.clone();
    if let Some((path, _)) = args.labels.iter().zip(&tracks).find(|(_, t)| t.states != states) {
        return Err(usage(format!("{}: state space differs from {}", path.display(), args.labels[0].display())));
    }
    let labels: Vec<Vec<usize>> = tracks.iter().map(LabelTrack::labels).collect();
    let data: Vec<(&FeatureStream, &[usize])> = streams.iter().zip(&labels).map(|(s, l)| (s, l.as_slice())).collect();
    let initial = match args.initial {
        InitialArg::Prior => InitialSource::PriorTable,
        InitialArg::Empirical => InitialSource::Empirical,
        InitialArg::Uniform => InitialSource::Uniform,
    };
    let options = TrainOptions { d_max: args.d_max, binarize: args.binarize, initial };
    let model = posehsmm::train_hsmm(&data, states, &options)?;
    save_model(&model, &args.out_model)?;
    Ok(())
}

pub fn train_library(args: &TrainLibraryArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.manifest).map_err(|e| usage(format!("{}: {e}", args.manifest.display())))?;
    let entries = read_clip_manifest(&text).map_err(|e| usage(format!("{}: {e}", args.manifest.display())))?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let clips: Vec<FeatureStream> =
        entries.iter().map(|e| load(&base.join(&e.path), load_stream)).collect::<Result<_, _>>()?;
    let refs: Vec<_> = clips.iter().zip(&entries).map(|(c, e)| (c, e.from, e.to, e.direction)).collect();
    let input = if args.full_rate { ChainInput::FullRate } else { ChainInput::Keyframes };
    let library = build_transition_library(&refs, &keyframe_params(&args.keyframes), input)?;
    save_library(&library, &args.out)?;
    Ok(())
}

pub fn decode(args: &DecodeArgs) -> Result<(), CliError> {
    let mut model = load(&args.model, load_model)?;
    let stream = load(&args.stream, load_stream)?;
    if args.censored {
        model = model.with_final_segment(FinalSegment::Censored);
    }
    let result = hsmm_viterbi(&stream, &model)?;
    let track = LabelTrack {
        states: model.states.clone(),
        segmentation: result.segmentation,
        scene_track: None,
        log_prob: Some(result.log_prob),
    };
    match &args.out {
        Some(path) => save_segmentation(&track, path)?,
        None => emit(None, &write_segmentation(&track))?,
    }
    Ok(())
}

pub fn summarize(args: &SummarizeArgs) -> Result<(), CliError> {
    let params = history_params(&args.history)?;
    let records = match (&args.stream, &args.model, &args.labels) {
        (Some(stream), Some(model), None) => {
            let stream = load(stream, load_stream)?;
            let model = load(model, load_model)?;
            summarize_history(&stream, &model, &params)?
        }
        (None, _, Some(labels)) => {
            let track = load(labels, load_labels)?;
            let (poses, scenes) = state_tracks(&track.labels(), &track.states)?;
            summarize_labels(&poses, &scenes, &params)?
        }
        _ => return Err(usage("pass --stream with --model, or --labels")),
    };
    emit(args.out.as_deref(), &write_history(&records, args.history.tick_seconds))
}

pub fn keyframes(args: &KeyframesArgs) -> Result<(), CliError> {
    let clip = load(&args.clip, load_stream)?;
    let kf = select_keyframes(&clip, &keyframe_params(&args.keyframes))?;
    emit(args.out.as_deref(), &write_keyframes(&kf))
}

pub fn classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let clip = load(&args.clip, load_stream)?;
    let library = load(&args.library, load_library)?;
    let record = classify_transition(&clip, &library)?;
    emit(args.out.as_deref(), &write_transition(&record))
}
