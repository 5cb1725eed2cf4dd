//! Prediction-versus-truth report: frame accuracy, window detection rate and
//! transition accuracy, as a table followed by `kind: evaluation` records.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use posehsmm::io::{load_labels, load_library, load_model, load_stream, read_clip_manifest, LabelTrack};
use posehsmm::summarizer::{state_tracks, window_detection_rate};
use posehsmm::{
    classify_transition, hsmm_joint_log_prob, summarize_labels, Error, HistoryParams, HsmmModel, Segmentation,
};

use crate::cli::EvaluateArgs;
use crate::commands::{emit, history_params, load, usage, CliError};

/// Gap allowed between a recorded and a recomputed decode score.
const SCORE_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
struct PairReport {
    name: String,
    ticks: usize,
    windows: usize,
    frame_accuracy: f64,
    window_detection_rate: f64,
    score: Option<ScoreCheck>,
}

#[derive(Debug)]
struct ScoreCheck {
    recorded: f64,
    rescored: f64,
    /// Score of the ground truth under the model, when it is expressible.
    truth: Option<f64>,
}

impl ScoreCheck {
    fn consistent(&self) -> bool {
        (self.recorded - self.rescored).abs() <= SCORE_TOLERANCE
    }

    /// The decoded path scores at least as well as the truth.
    fn optimal(&self) -> Option<bool> {
        self.truth.map(|t| self.rescored >= t - SCORE_TOLERANCE)
    }
}

#[derive(Debug)]
struct TransitionReport {
    clips: usize,
    correct: usize,
    no_motion: usize,
}

impl TransitionReport {
    fn accuracy(&self) -> f64 {
        self.correct as f64 / self.clips.max(1) as f64
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    if args.truths.len() != args.preds.len() {
        return Err(usage(format!("{} --truth files but {} --pred files", args.truths.len(), args.preds.len())));
    }
    if args.model.is_some() && args.streams.len() != args.preds.len() {
        return Err(usage("--model needs one --stream per --pred"));
    }
    if args.truths.is_empty() && args.clips.is_none() {
        return Err(usage("nothing to evaluate: pass --truth/--pred pairs and/or --clips with --library"));
    }
    let params = history_params(&args.history)?;
    let model = args.model.as_ref().map(|p| load(p, load_model)).transpose()?;

    // pairs are independent, so they are scored concurrently
    let pairs: Vec<PairReport> = thread::scope(|scope| {
        let handles: Vec<_> = (0..args.truths.len())
            .map(|i| {
                let model = model.as_ref();
                let stream = args.streams.get(i);
                scope.spawn(move || evaluate_pair(&args.truths[i], &args.preds[i], model.zip(stream), &params))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation thread panicked")).collect::<Result<_, _>>()
    })?;

    let transitions = match (&args.clips, &args.library) {
        (Some(manifest), Some(library)) => Some(evaluate_transitions(manifest, library)?),
        _ => None,
    };

    let records = render_records(&pairs, transitions.as_ref(), &params);
    let mut text = render_table(&pairs, transitions.as_ref());
    text.push('\n');
    text.push_str(&records);
    emit(None, &text)?;
    if let Some(out) = &args.out {
        emit(Some(out), &records)?;
    }
    Ok(())
}

fn evaluate_pair(
    truth_path: &Path,
    pred_path: &Path,
    scoring: Option<(&HsmmModel, &PathBuf)>,
    params: &HistoryParams,
) -> Result<PairReport, CliError> {
    let truth = load(truth_path, load_labels)?;
    let pred = load(pred_path, load_labels)?;
    let ticks = truth.segmentation.len();
    if pred.segmentation.len() != ticks {
        return Err(CliError::Core(Error::LabelMismatch { labels: pred.segmentation.len(), ticks }));
    }
    let (truth_labels, pred_labels) = (truth.labels(), pred.labels());
    let same = truth_labels.iter().zip(&pred_labels).filter(|&(&a, &b)| truth.states.get(a) == pred.states.get(b));
    let frame_accuracy = same.count() as f64 / ticks as f64;

    let (truth_poses, truth_scenes) = state_tracks(&truth_labels, &truth.states)?;
    let (pred_poses, pred_scenes) = state_tracks(&pred_labels, &pred.states)?;
    let reference = summarize_labels(&truth_poses, &truth_scenes, params)?;
    let predicted = summarize_labels(&pred_poses, &pred_scenes, params)?;
    let window_detection_rate = window_detection_rate(&predicted, &reference)?;

    let score = match scoring {
        Some((model, stream_path)) => Some(check_score(model, &load(stream_path, load_stream)?, &truth, &pred)?),
        None => None,
    };
    Ok(PairReport {
        name: format!("{} vs {}", file_name(truth_path), file_name(pred_path)),
        ticks,
        windows: reference.len(),
        frame_accuracy,
        window_detection_rate,
        score,
    })
}

fn check_score(
    model: &HsmmModel,
    stream: &posehsmm::FeatureStream,
    truth: &LabelTrack,
    pred: &LabelTrack,
) -> Result<ScoreCheck, CliError> {
    if pred.states != model.states {
        return Err(usage("prediction was not decoded with this model (state spaces differ)"));
    }
    let recorded = pred.log_prob.ok_or_else(|| usage("prediction carries no log_prob to check"))?;
    let rescored = hsmm_joint_log_prob(&pred.segmentation, stream, model)?;
    Ok(ScoreCheck { recorded, rescored, truth: truth_score(model, stream, truth) })
}

/// Score of the true segmentation, with its states mapped into the model's
/// state space; `None` when some true state has no counterpart.
fn truth_score(model: &HsmmModel, stream: &posehsmm::FeatureStream, truth: &LabelTrack) -> Option<f64> {
    let mapped: Option<Vec<usize>> = truth
        .labels()
        .iter()
        .map(|&s| {
            let id = truth.states.get(s)?;
            model.states.index_of(id.pose, id.scene).or_else(|| model.states.index_of(id.pose, None))
        })
        .collect();
    let seg = Segmentation::encode(&mapped?).ok()?;
    match hsmm_joint_log_prob(&seg, stream, model) {
        Ok(lp) => Some(lp),
        // segments the model cannot produce have probability zero
        Err(Error::DurationOutOfRange { .. }) => Some(f64::NEG_INFINITY),
        Err(_) => None,
    }
}

fn evaluate_transitions(manifest: &Path, library: &Path) -> Result<TransitionReport, CliError> {
    let text = fs::read_to_string(manifest).map_err(|e| usage(format!("{}: {e}", manifest.display())))?;
    let entries = read_clip_manifest(&text).map_err(|e| usage(format!("{}: {e}", manifest.display())))?;
    let library = load(library, load_library)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut report = TransitionReport { clips: entries.len(), correct: 0, no_motion: 0 };
    for entry in &entries {
        let clip = load(&base.join(&entry.path), load_stream)?;
        match classify_transition(&clip, &library) {
            Ok(rec) => {
                report.correct +=
                    usize::from((rec.from, rec.to, rec.direction) == (entry.from, entry.to, entry.direction))
            }
            Err(Error::NoTransitionDetected) => report.no_motion += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn score_cell(score: &Option<ScoreCheck>) -> String {
    match score {
        None => "-".into(),
        Some(s) => {
            let verdict = if s.consistent() { "ok" } else { "MISMATCH" };
            match s.optimal() {
                Some(true) => format!("{verdict}, >= truth"),
                Some(false) => format!("{verdict}, < truth"),
                None => verdict.into(),
            }
        }
    }
}

fn render_table(pairs: &[PairReport], transitions: Option<&TransitionReport>) -> String {
    let mut out = String::new();
    if !pairs.is_empty() {
        let width = pairs.iter().map(|p| p.name.len()).max().unwrap_or(0).max(5);
        let _ =
            writeln!(out, "{:<width$}  {:>7}  {:>9}  {:>10}  score check", "input", "ticks", "frame acc", "window det");
        for p in pairs {
            let _ = writeln!(
                out,
                "{:<width$}  {:>7}  {:>9.4}  {:>10.4}  {}",
                p.name,
                p.ticks,
                p.frame_accuracy,
                p.window_detection_rate,
                score_cell(&p.score)
            );
        }
        let fa = mean(pairs.iter().map(|p| p.frame_accuracy)).unwrap_or(0.0);
        let wd = mean(pairs.iter().map(|p| p.window_detection_rate)).unwrap_or(0.0);
        let _ = writeln!(out, "{:<width$}  {:>7}  {:>9.4}  {:>10.4}", "mean", "", fa, wd);
    }
    if let Some(t) = transitions {
        let _ = writeln!(
            out,
            "transitions: {} clips, {} correct, {} without motion, accuracy {:.4}",
            t.clips,
            t.correct,
            t.no_motion,
            t.accuracy()
        );
    }
    out
}

fn render_records(pairs: &[PairReport], transitions: Option<&TransitionReport>, params: &HistoryParams) -> String {
    let mut out = String::from("format: v1\nkind: evaluation\n");
    let _ = writeln!(out, "sample_every: {}", params.sample_every);
    let _ = writeln!(out, "window: {}", params.window);
    let _ = writeln!(out, "consistency: {}", params.consistency);
    for (i, p) in pairs.iter().enumerate() {
        let _ = write!(
            out,
            "pair {} ticks {} windows {} frame_accuracy {} window_detection_rate {}",
            i + 1,
            p.ticks,
            p.windows,
            p.frame_accuracy,
            p.window_detection_rate
        );
        if let Some(s) = &p.score {
            let truth = s.truth.map_or_else(|| "-".to_string(), |t| t.to_string());
            let _ = write!(
                out,
                " recorded_log_prob {} rescored_log_prob {} truth_log_prob {} score_consistent {}",
                s.recorded,
                s.rescored,
                truth,
                s.consistent()
            );
        }
        out.push('\n');
    }
    if let (Some(fa), Some(wd)) =
        (mean(pairs.iter().map(|p| p.frame_accuracy)), mean(pairs.iter().map(|p| p.window_detection_rate)))
    {
        let _ = writeln!(out, "mean frame_accuracy {fa} window_detection_rate {wd}");
    }
    if let Some(t) = transitions {
        let _ = writeln!(
            out,
            "transitions clips {} correct {} no_motion {} accuracy {}",
            t.clips,
            t.correct,
            t.no_motion,
            t.accuracy()
        );
    }
    out
}
