//! Per-channel Bernoulli observation models and their naive-Bayes fusion.
//!
//! A channel is one (view, modality) pair. Every channel contributes a
//! feature vector in `[0, 1]^F` per tick, or nothing when it is occluded or
//! dropped. Channels are conditionally independent given the state, so the
//! per-state log-likelihood of a frame is a sum over its available channels;
//! unavailable channels are marginalized by omission.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bernoulli means are clamped to `[EPS, 1 - EPS]`.
pub const EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Rgb,
    Depth,
    Mask,
}

impl View {
    pub const ALL: [View; 3] = [View::Left, View::Center, View::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            View::Left => "left",
            View::Center => "center",
            View::Right => "right",
        }
    }
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Rgb, Modality::Depth, Modality::Mask];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Rgb => "rgb",
            Modality::Depth => "depth",
            Modality::Mask => "mask",
        }
    }
}

/// One camera view observed through one modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ChannelId {
    pub view: View,
    pub modality: Modality,
}

impl ChannelId {
    pub const fn new(view: View, modality: Modality) -> Self {
        ChannelId { view, modality }
    }

    /// All nine view/modality pairs, view-major.
    pub fn all() -> Vec<ChannelId> {
        View::ALL.iter().flat_map(|&v| Modality::ALL.iter().map(move |&m| ChannelId::new(v, m))).collect()
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.view.as_str(), self.modality.as_str())
    }
}

impl FromStr for ChannelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad channel `{s}`, expected view/modality"));
        let (v, m) = s.split_once('/').ok_or_else(bad)?;
        let view = View::ALL.into_iter().find(|x| x.as_str().eq_ignore_ascii_case(v)).ok_or_else(bad)?;
        let modality = Modality::ALL.into_iter().find(|x| x.as_str().eq_ignore_ascii_case(m)).ok_or_else(bad)?;
        Ok(ChannelId { view, modality })
    }
}

impl TryFrom<String> for ChannelId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ChannelId> for String {
    fn from(c: ChannelId) -> String {
        c.to_string()
    }
}

/// Observations at one tick. `values[c]` and `available[c]` are indexed by the
/// owning stream's channel list; values of unavailable channels are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub tick: usize,
    pub values: Vec<Vec<f64>>,
    pub available: Vec<bool>,
}

impl FeatureFrame {
    pub fn num_available(&self) -> usize {
        self.available.iter().filter(|&&a| a).count()
    }

    /// Feature vector of the channel at `pos`, if it was observed.
    pub fn get(&self, pos: usize) -> Option<&[f64]> {
        match self.available.get(pos) {
            Some(true) => Some(&self.values[pos]),
            _ => None,
        }
    }
}

/// Time-indexed frames of per-channel feature vectors; ticks run `1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStream {
    channels: Vec<ChannelId>,
    dim: usize,
    frames: Vec<FeatureFrame>,
}

impl FeatureStream {
    pub fn new(channels: Vec<ChannelId>, dim: usize, frames: Vec<FeatureFrame>) -> Result<Self> {
        let mismatch = |msg: String| Err(Error::DimensionMismatch(msg));
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].contains(c) {
                return mismatch(format!("channel {c} listed twice"));
            }
        }
        for (t, frame) in frames.iter().enumerate() {
            if frame.tick != t + 1 {
                return mismatch(format!("frame {t} has tick {}, expected {}", frame.tick, t + 1));
            }
            if frame.values.len() != channels.len() || frame.available.len() != channels.len() {
                return mismatch(format!("tick {} does not carry {} channels", frame.tick, channels.len()));
            }
            for v in &frame.values {
                if v.len() != dim {
                    return mismatch(format!("tick {} has a vector of length {}, expected {dim}", frame.tick, v.len()));
                }
                if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return Err(Error::InvalidParameter(format!("tick {} has a feature outside [0, 1]", frame.tick)));
                }
            }
        }
        Ok(FeatureStream { channels, dim, frames })
    }

    pub fn channels(&self) -> &[ChannelId] {
        &self.channels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> &[FeatureFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame at 1-based `tick`.
    pub fn frame(&self, tick: usize) -> &FeatureFrame {
        &self.frames[tick - 1]
    }

    pub fn channel_position(&self, channel: ChannelId) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }

    /// New stream made of the given 1-based ticks, renumbered from 1.
    pub fn select_ticks(&self, ticks: &[usize]) -> FeatureStream {
        let frames =
            ticks.iter().enumerate().map(|(i, &t)| FeatureFrame { tick: i + 1, ..self.frame(t).clone() }).collect();
        FeatureStream { channels: self.channels.clone(), dim: self.dim, frames }
    }

    /// Ticks `first..=last`, renumbered from 1.
    pub fn slice(&self, first: usize, last: usize) -> FeatureStream {
        self.select_ticks(&(first..=last).collect::<Vec<_>>())
    }

    /// Same stream with `channel` marked unavailable at every tick.
    pub fn without_channel(&self, channel: ChannelId) -> FeatureStream {
        let mut out = self.clone();
        if let Some(pos) = self.channel_position(channel) {
            out.frames.iter_mut().for_each(|f| f.available[pos] = false);
        }
        out
    }

    /// Applies `f` to every feature value (clamped back into `[0, 1]`).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> FeatureStream {
        let mut out = self.clone();
        for frame in &mut out.frames {
            for v in frame.values.iter_mut().flatten() {
                *v = f(*v).clamp(0.0, 1.0);
            }
        }
        out
    }

    /// Concatenates streams with identical layouts, renumbering ticks.
    pub fn concat(streams: &[&FeatureStream]) -> Result<FeatureStream> {
        let first = streams.first().ok_or(Error::EmptySequence)?;
        let mut frames = Vec::new();
        for s in streams {
            if s.channels != first.channels || s.dim != first.dim {
                return Err(Error::DimensionMismatch("streams have different channel layouts".into()));
            }
            frames.extend(s.frames.iter().cloned());
        }
        frames.iter_mut().enumerate().for_each(|(i, f)| f.tick = i + 1);
        Ok(FeatureStream { channels: first.channels.clone(), dim: first.dim, frames })
    }
}

/// Bernoulli means of one channel, `Q x F`, clamped to `[EPS, 1 - EPS]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEmissionModel {
    channel: ChannelId,
    means: Vec<Vec<f64>>,
    log_on: Vec<Vec<f64>>,
    log_off: Vec<Vec<f64>>,
}

impl ChannelEmissionModel {
    pub fn new(channel: ChannelId, mut means: Vec<Vec<f64>>) -> Result<Self> {
        let dim = means.first().map_or(0, Vec::len);
        if means.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch(format!("ragged emission rows for {channel}")));
        }
        if means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite emission mean for {channel}")));
        }
        for m in means.iter_mut().flatten() {
            *m = m.clamp(EPS, 1.0 - EPS);
        }
        let log_on = means.iter().map(|r| r.iter().map(|m| m.ln()).collect()).collect();
        let log_off = means.iter().map(|r| r.iter().map(|m| (1.0 - m).ln()).collect()).collect();
        Ok(ChannelEmissionModel { channel, means, log_on, log_off })
    }

    pub fn channel(&self) -> ChannelId {
        self.channel
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn num_states(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// `sum_n x_n log mu_n + (1 - x_n) log(1 - mu_n)` for one state.
    pub fn log_likelihood(&self, state: usize, x: &[f64]) -> f64 {
        let on = &self.log_on[state];
        let off = &self.log_off[state];
        x.iter().zip(on.iter().zip(off)).map(|(&x, (&lon, &loff))| x * lon + (1.0 - x) * loff).sum()
    }
}

/// Emission models for every channel of a stream layout.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionModel {
    channels: Vec<ChannelEmissionModel>,
    binarize: bool,
}

impl EmissionModel {
    pub fn new(channels: Vec<ChannelEmissionModel>, binarize: bool) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::InvalidModel("no emission channels".into()))?;
        let (q, f) = (first.num_states(), first.dim());
        for (i, c) in channels.iter().enumerate() {
            if c.num_states() != q || c.dim() != f {
                return Err(Error::DimensionMismatch(format!(
                    "channel {} is {}x{}, expected {q}x{f}",
                    c.channel,
                    c.num_states(),
                    c.dim()
                )));
            }
            if channels[..i].iter().any(|o| o.channel == c.channel) {
                return Err(Error::InvalidModel(format!("channel {} modeled twice", c.channel)));
            }
        }
        Ok(EmissionModel { channels, binarize })
    }

    pub fn channels(&self) -> &[ChannelEmissionModel] {
        &self.channels
    }

    pub fn channel(&self, id: ChannelId) -> Option<&ChannelEmissionModel> {
        self.channels.iter().find(|c| c.channel == id)
    }

    pub fn num_states(&self) -> usize {
        self.channels[0].num_states()
    }

    pub fn dim(&self) -> usize {
        self.channels[0].dim()
    }

    /// Whether features are thresholded at 0.5 before scoring.
    pub fn binarize(&self) -> bool {
        self.binarize
    }

    /// Log-likelihood of everything observed at `tick` under `state`.
    pub fn frame_log_likelihood(&self, stream: &FeatureStream, tick: usize, state: usize) -> Result<f64> {
        let binding = self.bind(stream)?;
        let frame = stream.frame(tick);
        if frame.num_available() == 0 {
            return Err(Error::NoObservation);
        }
        let mut scratch = Vec::new();
        Ok(self.score_frame(&binding, frame, state, &mut scratch))
    }

    /// Per-tick, per-state log-likelihoods. Fully occluded ticks get the
    /// uniform surrogate `-F ln 2` for every state.
    pub fn score_stream(&self, stream: &FeatureStream) -> Result<EmissionTable> {
        let binding = self.bind(stream)?;
        let q = self.num_states();
        let uniform = -(self.dim() as f64) * std::f64::consts::LN_2;
        let mut data = Vec::with_capacity(stream.len() * q);
        let mut scratch = Vec::new();
        for frame in stream.frames() {
            if frame.num_available() == 0 {
                data.extend(std::iter::repeat_n(uniform, q));
            } else {
                for state in 0..q {
                    data.push(self.score_frame(&binding, frame, state, &mut scratch));
                }
            }
        }
        Ok(EmissionTable { ticks: stream.len(), states: q, data })
    }

    fn bind(&self, stream: &FeatureStream) -> Result<Vec<usize>> {
        if stream.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "stream has F = {}, model has F = {}",
                stream.dim(),
                self.dim()
            )));
        }
        stream
            .channels()
            .iter()
            .map(|&c| {
                self.channels
                    .iter()
                    .position(|m| m.channel == c)
                    .ok_or_else(|| Error::InvalidModel(format!("no emission model for channel {c}")))
            })
            .collect()
    }

    fn score_frame(&self, binding: &[usize], frame: &FeatureFrame, state: usize, scratch: &mut Vec<f64>) -> f64 {
        let mut total = 0.0;
        for (pos, &model_idx) in binding.iter().enumerate() {
            if let Some(x) = frame.get(pos) {
                let model = &self.channels[model_idx];
                total += if self.binarize {
                    scratch.clear();
                    scratch.extend(x.iter().map(|&v| binarize_value(v)));
                    model.log_likelihood(state, scratch)
                } else {
                    model.log_likelihood(state, x)
                };
            }
        }
        total
    }
}

pub(crate) fn binarize_value(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Log-likelihood of a frame under `state`, summed over available channels.
pub fn emission_log_likelihood(
    stream: &FeatureStream,
    tick: usize,
    state: usize,
    model: &EmissionModel,
) -> Result<f64> {
    model.frame_log_likelihood(stream, tick, state)
}

/// Dense `T x Q` table of emission log-likelihoods, row `t - 1` for tick `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionTable {
    ticks: usize,
    states: usize,
    data: Vec<f64>,
}

impl EmissionTable {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let states = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != states) {
            return Err(Error::DimensionMismatch("ragged emission table".into()));
        }
        Ok(EmissionTable { ticks: rows.len(), states, data: rows.concat() })
    }

    /// Entry for 1-based `tick`.
    #[inline]
    pub fn get(&self, tick: usize, state: usize) -> f64 {
        self.data[(tick - 1) * self.states + state]
    }

    pub fn ticks(&self) -> usize {
        self.ticks
    }

    pub fn states(&self) -> usize {
        self.states
    }
}

/// Running sums for the Bernoulli MLE over one channel.
struct ChannelCounts {
    sums: Vec<Vec<f64>>,
    counts: Vec<usize>,
}

/// Bernoulli MLE of one channel from labelled data: the per-state average of
/// each feature over ticks where the channel was observed. States never
/// observed on this channel fall back to 0.5.
pub fn fit_channel_emissions(
    stream: &FeatureStream,
    labels: &[usize],
    channel: ChannelId,
    num_states: usize,
    binarize: bool,
) -> Result<ChannelEmissionModel> {
    fit_channel_multi(&[(stream, labels)], channel, num_states, binarize)
}

fn fit_channel_multi(
    data: &[(&FeatureStream, &[usize])],
    channel: ChannelId,
    num_states: usize,
    binarize: bool,
) -> Result<ChannelEmissionModel> {
    let dim = data.first().map_or(0, |(s, _)| s.dim());
    let mut acc = ChannelCounts { sums: vec![vec![0.0; dim]; num_states], counts: vec![0; num_states] };
    let mut seen = false;
    for (stream, labels) in data {
        if labels.len() != stream.len() {
            return Err(Error::LabelMismatch { labels: labels.len(), ticks: stream.len() });
        }
        let Some(pos) = stream.channel_position(channel) else {
            continue;
        };
        for (frame, &y) in stream.frames().iter().zip(labels.iter()) {
            if y >= num_states {
                return Err(Error::InvalidParameter(format!("label {y} outside {num_states} states")));
            }
            if let Some(x) = frame.get(pos) {
                seen = true;
                acc.counts[y] += 1;
                for (s, &v) in acc.sums[y].iter_mut().zip(x) {
                    *s += if binarize { binarize_value(v) } else { v };
                }
            }
        }
    }
    if !seen {
        return Err(Error::ChannelAbsent(channel));
    }
    let means = acc
        .sums
        .into_iter()
        .zip(acc.counts)
        .map(|(sums, n)| if n == 0 { vec![0.5; dim] } else { sums.into_iter().map(|s| s / n as f64).collect() })
        .collect();
    ChannelEmissionModel::new(channel, means)
}

/// Fits every channel appearing in the training streams.
pub fn fit_emissions(data: &[(&FeatureStream, &[usize])], num_states: usize, binarize: bool) -> Result<EmissionModel> {
    let mut channels: Vec<ChannelId> = Vec::new();
    for (s, _) in data {
        for &c in s.channels() {
            if !channels.contains(&c) {
                channels.push(c);
            }
        }
    }
    let models =
        channels.into_iter().map(|c| fit_channel_multi(data, c, num_states, binarize)).collect::<Result<Vec<_>>>()?;
    EmissionModel::new(models, binarize)
}
