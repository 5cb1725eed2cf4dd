//! Line-oriented text formats.
//!
//! Every file starts with `format: v1` and a `kind:` line, followed by
//! `key: value` header lines and then whitespace-separated records. Blank
//! lines and lines starting with `#` are ignored. Model parameters are
//! written with 17 significant digits, so saving and loading reproduces them
//! bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::emission::{ChannelEmissionModel, ChannelId, EmissionModel, FeatureFrame, FeatureStream};
use crate::error::{Error, Result};
use crate::inference::{FinalSegment, HsmmModel, TransitionMatrix};
use crate::keyframes::{Keyframe, KeyframeParams, KeyframeSet};
use crate::model::{
    DurationDist, DurationModel, InitialDistribution, PoseLabel, SceneCondition, Segment, Segmentation, StateSpace,
};
use crate::simulator::Direction;
use crate::summarizer::{ChainInput, HistoryRecord, TransitionChain, TransitionLibrary, TransitionRecord};

pub const FORMAT_VERSION: &str = "v1";

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|&x| float(x)).collect::<Vec<_>>().join(" ")
}

fn header(kind: &str) -> String {
    format!("format: {FORMAT_VERSION}\nkind: {kind}\n")
}

/// Cursor over the meaningful lines of a file.
struct Reader<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str, kind: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut r = Reader { lines, pos: 0 };
        let version = r.value("format")?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version.to_string()));
        }
        let found = r.value("kind")?;
        if found != kind {
            return Err(r.error(format!("expected a `{kind}` file, found `{found}`")));
        }
        Ok(r)
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).or(self.lines.last()).map_or(0, |l| l.0)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let line = self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.0);
        Error::Format { line, msg: msg.into() }
    }

    fn next(&mut self) -> Option<&'a str> {
        let l = self.lines.get(self.pos).map(|l| l.1);
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l.1)
    }

    /// Next line, which must be `key: value`.
    fn value(&mut self, key: &str) -> Result<&'a str> {
        let line_no = self.line_no();
        let line = self.next().ok_or(Error::Format { line: line_no, msg: format!("missing `{key}:`") })?;
        match line.split_once(':') {
            Some((k, v)) if k.trim() == key => Ok(v.trim()),
            _ => Err(self.error(format!("expected `{key}:`"))),
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.value(key)?;
        v.parse().map_err(|_| self.error(format!("bad `{key}` value `{v}`")))
    }

    /// Next record, split into fields, whose first field must be `tag`.
    fn record(&mut self, tag: &str) -> Result<Vec<&'a str>> {
        let line_no = self.line_no();
        let line = self.next().ok_or(Error::Format { line: line_no, msg: format!("missing `{tag}` record") })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.first() != Some(&tag) {
            return Err(self.error(format!("expected a `{tag}` record")));
        }
        Ok(fields[1..].to_vec())
    }

    fn field<T: FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.error(format!("cannot parse `{s}`")))
    }

    fn fields<T: FromStr>(&self, xs: &[&str]) -> Result<Vec<T>> {
        xs.iter().map(|s| self.field(s)).collect()
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next() {
            None => Ok(()),
            Some(_) => Err(self.error("unexpected trailing content")),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    Ok(fs::write(path, text)?)
}

fn state_name(states: &StateSpace, i: usize) -> String {
    states.get(i).map_or_else(|| "?".into(), |s| s.to_string())
}

fn parse_state(r: &Reader, s: &str) -> Result<(PoseLabel, Option<SceneCondition>)> {
    match s.split_once('/') {
        Some((p, sc)) => Ok((r.field(p)?, Some(r.field(sc)?))),
        None => Ok((r.field(s)?, None)),
    }
}

fn write_states(out: &mut String, states: &StateSpace) {
    let names: Vec<String> = (0..states.len()).map(|i| state_name(states, i)).collect();
    let _ = writeln!(out, "states: {}", names.join(" "));
}

fn read_states(r: &mut Reader) -> Result<StateSpace> {
    let v = r.value("states")?;
    let pairs = v.split_whitespace().map(|s| parse_state(r, s)).collect::<Result<Vec<_>>>()?;
    Ok(StateSpace::from_pairs(pairs))
}

fn write_channels(out: &mut String, channels: &[ChannelId]) {
    let names: Vec<String> = channels.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "channels: {}", names.join(" "));
}

fn read_channels(r: &mut Reader) -> Result<Vec<ChannelId>> {
    let v = r.value("channels")?;
    v.split_whitespace().map(|s| r.field(s)).collect()
}

// ---------------------------------------------------------------- models

fn write_durations(out: &mut String, durations: &DurationModel) {
    for (i, d) in durations.dists().iter().enumerate() {
        let _ = match *d {
            DurationDist::Gaussian { mean, std } => {
                writeln!(out, "duration {i} gaussian {} {}", float(mean), float(std))
            }
            DurationDist::Geometric { self_loop } => {
                writeln!(out, "duration {i} geometric {}", float(self_loop))
            }
        };
    }
}

fn read_durations(r: &mut Reader, q: usize, d_max: usize) -> Result<DurationModel> {
    let mut dists = Vec::with_capacity(q);
    for i in 0..q {
        let f = r.record("duration")?;
        if f.first().map(|s| r.field::<usize>(s)).transpose()? != Some(i) {
            return Err(r.error(format!("expected duration of state {i}")));
        }
        let dist = match (f.get(1).copied(), f.len()) {
            (Some("gaussian"), 4) => DurationDist::Gaussian { mean: r.field(f[2])?, std: r.field(f[3])? },
            (Some("geometric"), 3) => DurationDist::Geometric { self_loop: r.field(f[2])? },
            _ => return Err(r.error("bad duration record")),
        };
        dists.push(dist);
    }
    DurationModel::new(dists, d_max)
}

fn write_emissions(out: &mut String, emissions: &EmissionModel) {
    for ch in emissions.channels() {
        for (i, row) in ch.means().iter().enumerate() {
            let _ = writeln!(out, "emission {} {i} {}", ch.channel(), floats(row));
        }
    }
}

fn read_emissions(
    r: &mut Reader,
    channels: &[ChannelId],
    q: usize,
    dim: usize,
    binarize: bool,
) -> Result<EmissionModel> {
    let mut models = Vec::with_capacity(channels.len());
    for &c in channels {
        let mut rows = Vec::with_capacity(q);
        for i in 0..q {
            let f = r.record("emission")?;
            if f.len() != dim + 2 || r.field::<ChannelId>(f[0])? != c || r.field::<usize>(f[1])? != i {
                return Err(r.error(format!("expected {dim} emission means for {c}, state {i}")));
            }
            rows.push(r.fields(&f[2..])?);
        }
        models.push(ChannelEmissionModel::new(c, rows)?);
    }
    EmissionModel::new(models, binarize)
}

pub fn write_model(model: &HsmmModel) -> String {
    let mut out = header("model");
    let q = model.num_states();
    let _ = writeln!(out, "num_states: {q}");
    let _ = writeln!(out, "dim: {}", model.emissions.dim());
    let _ = writeln!(out, "d_max: {}", model.d_max());
    let final_segment = match model.final_segment {
        FinalSegment::Complete => "complete",
        FinalSegment::Censored => "censored",
    };
    let _ = writeln!(out, "final_segment: {final_segment}");
    let _ = writeln!(out, "binarize: {}", model.emissions.binarize());
    let channels: Vec<ChannelId> = model.emissions.channels().iter().map(|c| c.channel()).collect();
    write_channels(&mut out, &channels);
    write_states(&mut out, &model.states);
    let _ = writeln!(out, "initial {}", floats(model.initial.probs()));
    for (i, row) in model.transitions.rows().iter().enumerate() {
        let _ = writeln!(out, "transition {i} {}", floats(row));
    }
    write_durations(&mut out, &model.durations);
    write_emissions(&mut out, &model.emissions);
    out
}

pub fn read_model(text: &str) -> Result<HsmmModel> {
    let mut r = Reader::new(text, "model")?;
    let q: usize = r.parsed("num_states")?;
    let dim: usize = r.parsed("dim")?;
    let d_max: usize = r.parsed("d_max")?;
    let final_segment = match r.value("final_segment")? {
        "complete" => FinalSegment::Complete,
        "censored" => FinalSegment::Censored,
        other => return Err(r.error(format!("unknown final segment `{other}`"))),
    };
    let binarize: bool = r.parsed("binarize")?;
    let channels = read_channels(&mut r)?;
    let states = read_states(&mut r)?;
    if states.len() != q {
        return Err(r.error(format!("{} state names for {q} states", states.len())));
    }
    let pi = r.record("initial")?;
    let initial = InitialDistribution::new(r.fields(&pi)?)?;
    let mut rows = Vec::with_capacity(q);
    for i in 0..q {
        let f = r.record("transition")?;
        if f.len() != q + 1 || r.field::<usize>(f[0])? != i {
            return Err(r.error(format!("expected transition row {i} with {q} entries")));
        }
        rows.push(r.fields(&f[1..])?);
    }
    let transitions = TransitionMatrix::new(rows)?;
    let durations = read_durations(&mut r, q, d_max)?;
    let emissions = read_emissions(&mut r, &channels, q, dim, binarize)?;
    r.expect_end()?;
    Ok(HsmmModel::new(states, initial, transitions, durations, emissions)?.with_final_segment(final_segment))
}

pub fn save_model(model: &HsmmModel, path: &Path) -> Result<()> {
    write_file(path, &write_model(model))
}

pub fn load_model(path: &Path) -> Result<HsmmModel> {
    read_model(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------- streams

/// One line per tick: the tick, then per channel the comma-separated
/// features or `-` when the channel was unavailable.
pub fn write_stream(stream: &FeatureStream) -> String {
    let mut out = header("stream");
    let _ = writeln!(out, "dim: {}", stream.dim());
    write_channels(&mut out, stream.channels());
    let _ = writeln!(out, "ticks: {}", stream.len());
    for frame in stream.frames() {
        let _ = write!(out, "{}", frame.tick);
        for (values, &ok) in frame.values.iter().zip(&frame.available) {
            if ok {
                let v: Vec<String> = values.iter().map(|x| x.to_string()).collect();
                let _ = write!(out, " {}", v.join(","));
            } else {
                out.push_str(" -");
            }
        }
        out.push('\n');
    }
    out
}

pub fn read_stream(text: &str) -> Result<FeatureStream> {
    let mut r = Reader::new(text, "stream")?;
    let dim: usize = r.parsed("dim")?;
    let channels = read_channels(&mut r)?;
    let ticks: usize = r.parsed("ticks")?;
    let mut frames = Vec::with_capacity(ticks);
    while let Some(line) = r.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != channels.len() + 1 {
            return Err(r.error(format!("expected a tick and {} channels", channels.len())));
        }
        let tick: usize = r.field(f[0])?;
        let mut values = Vec::with_capacity(channels.len());
        let mut available = Vec::with_capacity(channels.len());
        for field in &f[1..] {
            if *field == "-" {
                values.push(vec![0.0; dim]);
                available.push(false);
            } else {
                values.push(field.split(',').map(|x| r.field(x)).collect::<Result<Vec<f64>>>()?);
                available.push(true);
            }
        }
        frames.push(FeatureFrame { tick, values, available });
    }
    if frames.len() != ticks {
        return Err(r.error(format!("header announces {ticks} ticks, found {}", frames.len())));
    }
    FeatureStream::new(channels, dim, frames)
}

pub fn save_stream(stream: &FeatureStream, path: &Path) -> Result<()> {
    write_file(path, &write_stream(stream))
}

pub fn load_stream(path: &Path) -> Result<FeatureStream> {
    read_stream(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------- labels

/// Labelled segmentation of a stream: simulator ground truth (with a scene
/// track) or decoder output (with a score).
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTrack {
    pub states: StateSpace,
    pub segmentation: Segmentation,
    pub scene_track: Option<Vec<SceneCondition>>,
    pub log_prob: Option<f64>,
}

impl LabelTrack {
    pub fn labels(&self) -> Vec<usize> {
        self.segmentation.decode()
    }
}

const TRUTH: &str = "truth";
const SEGMENTATION: &str = "segmentation";

fn write_track(kind: &str, track: &LabelTrack) -> String {
    let mut out = header(kind);
    let _ = writeln!(out, "ticks: {}", track.segmentation.len());
    if let Some(lp) = track.log_prob {
        let _ = writeln!(out, "log_prob: {}", float(lp));
    }
    write_states(&mut out, &track.states);
    for s in track.segmentation.segments() {
        let _ = writeln!(out, "segment {} {} {} {}", s.start, s.duration, s.state, state_name(&track.states, s.state));
    }
    if let Some(scenes) = &track.scene_track {
        let mut start = 0;
        while start < scenes.len() {
            let len = scenes[start..].iter().take_while(|&&s| s == scenes[start]).count();
            let _ = writeln!(out, "scene {} {} {}", start + 1, len, scenes[start]);
            start += len;
        }
    }
    out
}

fn read_track(text: &str, kind: &str) -> Result<LabelTrack> {
    let mut r = Reader::new(text, kind)?;
    let ticks: usize = r.parsed("ticks")?;
    let log_prob =
        if r.peek().is_some_and(|l| l.starts_with("log_prob:")) { Some(r.parsed("log_prob")?) } else { None };
    let states = read_states(&mut r)?;
    let mut segments = Vec::new();
    while r.peek().is_some_and(|l| l.starts_with("segment ")) {
        let f = r.record("segment")?;
        if f.len() < 3 {
            return Err(r.error("segment needs start, duration and state"));
        }
        let state: usize = r.field(f[2])?;
        if state >= states.len() {
            return Err(r.error(format!("state {state} outside {} states", states.len())));
        }
        segments.push(Segment { start: r.field(f[0])?, duration: r.field(f[1])?, state });
    }
    let segmentation = Segmentation::new(segments, ticks)?;
    let mut scenes = Vec::new();
    while r.peek().is_some() {
        let f = r.record("scene")?;
        if f.len() != 3 || r.field::<usize>(f[0])? != scenes.len() + 1 {
            return Err(r.error("scene runs must be contiguous `scene start len BC|DO` records"));
        }
        let scene: SceneCondition = r.field(f[2])?;
        scenes.extend(std::iter::repeat_n(scene, r.field(f[1])?));
    }
    let scene_track = if scenes.is_empty() {
        None
    } else if scenes.len() == ticks {
        Some(scenes)
    } else {
        return Err(r.error(format!("scene track covers {} of {ticks} ticks", scenes.len())));
    };
    Ok(LabelTrack { states, segmentation, scene_track, log_prob })
}

pub fn write_truth(track: &LabelTrack) -> String {
    write_track(TRUTH, track)
}

pub fn read_truth(text: &str) -> Result<LabelTrack> {
    read_track(text, TRUTH)
}

pub fn write_segmentation(track: &LabelTrack) -> String {
    write_track(SEGMENTATION, track)
}

pub fn read_segmentation(text: &str) -> Result<LabelTrack> {
    read_track(text, SEGMENTATION)
}

/// Reads either a ground-truth or a decoded label file.
pub fn load_labels(path: &Path) -> Result<LabelTrack> {
    let text = fs::read_to_string(path)?;
    match read_truth(&text) {
        Err(Error::Format { .. }) => read_segmentation(&text),
        other => other,
    }
}

pub fn save_truth(track: &LabelTrack, path: &Path) -> Result<()> {
    write_file(path, &write_truth(track))
}

pub fn save_segmentation(track: &LabelTrack, path: &Path) -> Result<()> {
    write_file(path, &write_segmentation(track))
}

// ---------------------------------------------------------------- history

/// Columns: window start and length in ticks, pose symbol, scene (`-` when
/// unknown), confidence, and the window start in seconds.
pub fn write_history(records: &[HistoryRecord], tick_seconds: f64) -> String {
    let mut out = header("history");
    let _ = writeln!(out, "tick_seconds: {tick_seconds}");
    for h in records {
        let scene = h.scene.map_or("-".to_string(), |s| s.to_string());
        let start_s = (h.window_start - 1) as f64 * tick_seconds;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            h.window_start,
            h.window_len,
            h.label.symbol(),
            scene,
            h.confidence,
            start_s
        );
    }
    out
}

pub fn read_history(text: &str) -> Result<Vec<HistoryRecord>> {
    let mut r = Reader::new(text, "history")?;
    let _: f64 = r.parsed("tick_seconds")?;
    let mut out = Vec::new();
    while let Some(line) = r.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(r.error("history records have six fields"));
        }
        let symbol: i8 = r.field(f[2])?;
        out.push(HistoryRecord {
            window_start: r.field(f[0])?,
            window_len: r.field(f[1])?,
            label: PoseLabel::from_symbol(symbol).ok_or_else(|| r.error(format!("unknown pose symbol {symbol}")))?,
            scene: if f[3] == "-" { None } else { Some(r.field(f[3])?) },
            confidence: r.field(f[4])?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- keyframes

pub fn write_keyframes(kf: &KeyframeSet) -> String {
    let mut out = header("keyframes");
    let _ = writeln!(out, "k_max: {}", kf.k_max);
    let _ = writeln!(out, "threshold: {}", kf.threshold);
    for k in &kf.frames {
        let _ = writeln!(out, "{} {} {} {}", k.tick, k.stage, k.channel, k.score);
    }
    out
}

pub fn read_keyframes(text: &str) -> Result<KeyframeSet> {
    let mut r = Reader::new(text, "keyframes")?;
    let k_max = r.parsed("k_max")?;
    let threshold = r.parsed("threshold")?;
    let mut frames = Vec::new();
    while let Some(line) = r.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(r.error("keyframe records are `tick stage channel score`"));
        }
        frames.push(Keyframe {
            tick: r.field(f[0])?,
            stage: r.field(f[1])?,
            channel: r.field(f[2])?,
            score: r.field(f[3])?,
        });
    }
    Ok(KeyframeSet { frames, k_max, threshold })
}

// ---------------------------------------------------------------- transitions

pub fn write_transition(rec: &TransitionRecord) -> String {
    let mut out = header("transition");
    let _ = writeln!(out, "{} {} {} {} {}", rec.from, rec.to, rec.direction, float(rec.log_prob), rec.n_pseudo_poses);
    out
}

pub fn read_transition(text: &str) -> Result<TransitionRecord> {
    let mut r = Reader::new(text, "transition")?;
    let line = r.next().ok_or_else(|| r.error("missing transition record"))?;
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 5 {
        return Err(r.error("transition records are `from to direction log_prob n_pseudo_poses`"));
    }
    let rec = TransitionRecord {
        from: r.field(f[0])?,
        to: r.field(f[1])?,
        direction: r.field(f[2])?,
        log_prob: r.field(f[3])?,
        n_pseudo_poses: r.field(f[4])?,
    };
    r.expect_end()?;
    Ok(rec)
}

/// One labelled transition clip of a clip set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipEntry {
    /// Stream file, relative to the manifest's directory.
    pub path: String,
    pub from: PoseLabel,
    pub to: PoseLabel,
    pub direction: Direction,
}

pub fn write_clip_manifest(entries: &[ClipEntry]) -> String {
    let mut out = header("clips");
    for e in entries {
        let _ = writeln!(out, "{} {} {} {}", e.path, e.from, e.to, e.direction);
    }
    out
}

pub fn read_clip_manifest(text: &str) -> Result<Vec<ClipEntry>> {
    let mut r = Reader::new(text, "clips")?;
    let mut out = Vec::new();
    while let Some(line) = r.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(r.error("clip records are `path from to direction`"));
        }
        out.push(ClipEntry {
            path: f[0].to_string(),
            from: r.field(f[1])?,
            to: r.field(f[2])?,
            direction: r.field(f[3])?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- library

pub fn write_library(library: &TransitionLibrary) -> String {
    let mut out = header("library");
    let p = library.kf_params;
    let _ = writeln!(out, "k_max: {}", p.k_max);
    let _ = writeln!(out, "endpoint_threshold: {}", float(p.endpoint_threshold));
    let _ = writeln!(out, "ratio_threshold: {}", float(p.ratio_threshold));
    let input = match library.input {
        ChainInput::Keyframes => "keyframes",
        ChainInput::FullRate => "full-rate",
    };
    let _ = writeln!(out, "input: {input}");
    let _ = writeln!(out, "chains: {}", library.len());
    for (&(from, to, dir), chain) in library.iter() {
        let m = &chain.model;
        let channels: Vec<String> = m.emissions.channels().iter().map(|c| c.channel().to_string()).collect();
        let _ = writeln!(
            out,
            "chain {from} {to} {dir} {} {} {} {}",
            chain.len(),
            m.emissions.dim(),
            m.d_max(),
            channels.join(",")
        );
        write_durations(&mut out, &m.durations);
        write_emissions(&mut out, &m.emissions);
    }
    out
}

pub fn read_library(text: &str) -> Result<TransitionLibrary> {
    let mut r = Reader::new(text, "library")?;
    let kf_params = KeyframeParams {
        k_max: r.parsed("k_max")?,
        endpoint_threshold: r.parsed("endpoint_threshold")?,
        ratio_threshold: r.parsed("ratio_threshold")?,
    };
    let input = match r.value("input")? {
        "keyframes" => ChainInput::Keyframes,
        "full-rate" => ChainInput::FullRate,
        other => return Err(r.error(format!("unknown chain input `{other}`"))),
    };
    let n: usize = r.parsed("chains")?;
    let mut library = TransitionLibrary::new(kf_params, input);
    for _ in 0..n {
        let f = r.record("chain")?;
        if f.len() != 7 {
            return Err(r.error("chain records are `chain from to direction length dim d_max channels`"));
        }
        let (from, to, dir): (PoseLabel, PoseLabel, Direction) = (r.field(f[0])?, r.field(f[1])?, r.field(f[2])?);
        let (len, dim, d_max): (usize, usize, usize) = (r.field(f[3])?, r.field(f[4])?, r.field(f[5])?);
        let channels = f[6].split(',').map(|c| r.field(c)).collect::<Result<Vec<ChannelId>>>()?;
        let durations = read_durations(&mut r, len, d_max)?;
        let emissions = read_emissions(&mut r, &channels, len, dim, false)?;
        library.insert(from, to, dir, TransitionChain::new(from, to, durations, emissions)?);
    }
    r.expect_end()?;
    Ok(library)
}

pub fn save_library(library: &TransitionLibrary, path: &Path) -> Result<()> {
    write_file(path, &write_library(library))
}

pub fn load_library(path: &Path) -> Result<TransitionLibrary> {
    read_library(&fs::read_to_string(path)?)
}
