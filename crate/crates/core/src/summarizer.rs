//! Motion summaries at two resolutions: a windowed pose history over a long
//! sequence, and rotation classification of short transition clips against
//! a library of pseudo-pose chains.

use std::collections::BTreeMap;

use crate::emission::{fit_emissions, FeatureStream};
use crate::error::{Error, Result};
use crate::inference::DURATION_STD_FLOOR;
use crate::inference::{hsmm_joint_log_prob_table, hsmm_viterbi, HsmmModel, TransitionMatrix};
use crate::keyframes::{select_keyframes, KeyframeParams, KeyframeSet};
use crate::model::{
    DurationDist, DurationModel, InitialDistribution, PoseLabel, SceneCondition, Segment, Segmentation, StateSpace,
};
use crate::simulator::Direction;

/// Modal fraction at or above which a window keeps its label.
pub const DEFAULT_CONSISTENCY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryParams {
    pub sample_every: usize,
    pub window: usize,
    pub consistency: f64,
}

impl Default for HistoryParams {
    fn default() -> Self {
        HistoryParams { sample_every: 1, window: 10, consistency: DEFAULT_CONSISTENCY }
    }
}

impl HistoryParams {
    fn validate(&self) -> Result<()> {
        if self.sample_every == 0 || self.window < self.sample_every {
            return Err(Error::InvalidParameter(format!(
                "need window ({}) >= sample_every ({}) >= 1",
                self.window, self.sample_every
            )));
        }
        if !(self.consistency.is_finite() && self.consistency >= 0.0) {
            return Err(Error::InvalidParameter(format!("consistency {} is not a fraction", self.consistency)));
        }
        Ok(())
    }
}

/// One window of the pose history.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub window_start: usize,
    pub window_len: usize,
    /// Modal pose, or `other` when the modal fraction is below the threshold.
    pub label: PoseLabel,
    /// Majority scene among the modal samples; `None` without scene labels.
    pub scene: Option<SceneCondition>,
    /// Modal fraction of the window's samples.
    pub confidence: f64,
}

/// Windowed summary of per-tick poses (tick `t` at index `t - 1`). Windows
/// tile the sequence from tick 1; the last may be shorter. Each window is
/// sampled every `sample_every` ticks starting at its own first tick, so no
/// window is ever empty. Ties between modal poses go to the lower pose
/// ordinal.
pub fn summarize_labels(
    poses: &[PoseLabel],
    scenes: &[Option<SceneCondition>],
    params: &HistoryParams,
) -> Result<Vec<HistoryRecord>> {
    params.validate()?;
    if poses.is_empty() {
        return Err(Error::EmptySequence);
    }
    if scenes.len() != poses.len() {
        return Err(Error::LabelMismatch { labels: scenes.len(), ticks: poses.len() });
    }
    let mut records = Vec::new();
    let mut start = 1;
    while start <= poses.len() {
        let end = (start + params.window - 1).min(poses.len());
        let samples: Vec<usize> = (start..=end).step_by(params.sample_every).collect();
        let mut counts: BTreeMap<PoseLabel, usize> = BTreeMap::new();
        for &t in &samples {
            *counts.entry(poses[t - 1]).or_default() += 1;
        }
        let (&mode, &count) = counts
            .iter()
            .fold(None, |best: Option<(&PoseLabel, &usize)>, (p, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((p, c)),
            })
            .expect("window has samples");
        let confidence = count as f64 / samples.len() as f64;
        let (mut bc, mut dark) = (0, 0);
        for &t in samples.iter().filter(|&&t| poses[t - 1] == mode) {
            match scenes[t - 1] {
                Some(SceneCondition::Bc) => bc += 1,
                Some(SceneCondition::Do) => dark += 1,
                None => {}
            }
        }
        let scene = match (bc, dark) {
            (0, 0) => None,
            (b, d) if b >= d => Some(SceneCondition::Bc),
            _ => Some(SceneCondition::Do),
        };
        let label = if confidence >= params.consistency { mode } else { PoseLabel::Other };
        records.push(HistoryRecord { window_start: start, window_len: end - start + 1, label, scene, confidence });
        start = end + 1;
    }
    Ok(records)
}

/// Decodes the stream and summarizes the decoded poses.
pub fn summarize_history(
    stream: &FeatureStream,
    model: &HsmmModel,
    params: &HistoryParams,
) -> Result<Vec<HistoryRecord>> {
    params.validate()?;
    let decoded = hsmm_viterbi(stream, model)?;
    let (poses, scenes) = state_tracks(&decoded.labels(), &model.states)?;
    summarize_labels(&poses, &scenes, params)
}

/// Per-tick pose and scene of a state sequence.
pub fn state_tracks(labels: &[usize], states: &StateSpace) -> Result<(Vec<PoseLabel>, Vec<Option<SceneCondition>>)> {
    labels
        .iter()
        .map(|&y| {
            states
                .get(y)
                .map(|s| (s.pose, s.scene))
                .ok_or_else(|| Error::InvalidParameter(format!("state {y} outside the state space")))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

/// Fraction of windows whose predicted label equals the reference label.
pub fn window_detection_rate(predicted: &[HistoryRecord], reference: &[HistoryRecord]) -> Result<f64> {
    if predicted.len() != reference.len() || predicted.is_empty() {
        return Err(Error::LabelMismatch { labels: predicted.len(), ticks: reference.len() });
    }
    let hits = predicted.iter().zip(reference).filter(|(p, r)| p.label == r.label).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Classified rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub from: PoseLabel,
    pub to: PoseLabel,
    pub direction: Direction,
    pub log_prob: f64,
    /// Length of the winning chain.
    pub n_pseudo_poses: usize,
}

/// What a chain is matched against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ChainInput {
    /// Only the keyframes; durations count keyframes.
    #[default]
    Keyframes,
    /// Every frame of the clip; durations count ticks.
    FullRate,
}

/// Left-to-right pseudo-pose model of one (from, to, direction).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionChain {
    pub model: HsmmModel,
}

impl TransitionChain {
    pub fn len(&self) -> usize {
        self.model.num_states()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds a strict left-to-right chain; position 0 is entered first.
    pub fn new(
        from: PoseLabel,
        to: PoseLabel,
        durations: DurationModel,
        emissions: crate::emission::EmissionModel,
    ) -> Result<TransitionChain> {
        let l = emissions.num_states();
        if l == 0 {
            return Err(Error::InvalidModel("empty chain".into()));
        }
        let states = StateSpace::from_pairs((0..l).map(|k| {
            let pose = match k {
                0 => from,
                k if k + 1 == l => to,
                _ => PoseLabel::Other,
            };
            (pose, None)
        }));
        let mut initial = vec![0.0; l];
        initial[0] = 1.0;
        let rows = (0..l).map(|i| (0..l).map(|j| if j == i + 1 { 1.0 } else { 0.0 }).collect()).collect();
        let model = HsmmModel::new(
            states,
            InitialDistribution::new(initial)?,
            TransitionMatrix::new_segmental(rows)?,
            durations,
            emissions,
        )?;
        Ok(TransitionChain { model })
    }

    /// Best complete pass through the chain (every position visited once, in
    /// order) and its joint log-probability; `None` when the input is too
    /// short or too long for the chain.
    pub fn align(&self, input: &FeatureStream) -> Result<Option<(Segmentation, f64)>> {
        let table = self.model.emissions.score_stream(input)?;
        let (m, l, d_max) = (table.ticks(), self.len(), self.model.d_max());
        // cum[t][k]: emission sum of ticks 1..=t under position k
        let mut cum: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        cum.push(vec![0.0; l]);
        for t in 1..=m {
            let row = (0..l).map(|k| cum[t - 1][k] + table.get(t, k)).collect();
            cum.push(row);
        }
        let neg = f64::NEG_INFINITY;
        // best[k][t]: positions 0..=k covering ticks 1..=t; back stores the duration
        let mut best = vec![vec![neg; m + 1]; l];
        let mut back = vec![vec![0usize; m + 1]; l];
        for k in 0..l {
            for t in (k + 1)..=m {
                for d in 1..=d_max.min(t - k) {
                    let prev = if k == 0 {
                        if d == t {
                            0.0
                        } else {
                            neg
                        }
                    } else {
                        best[k - 1][t - d]
                    };
                    if prev == neg {
                        continue;
                    }
                    let last = k + 1 == l && t == m;
                    let s = prev + self.model.log_duration(k, d, last) + cum[t][k] - cum[t - d][k];
                    if s > best[k][t] {
                        best[k][t] = s;
                        back[k][t] = d;
                    }
                }
            }
        }
        if m < l || best[l - 1][m] == neg {
            return Ok(None);
        }
        let mut segments = Vec::with_capacity(l);
        let mut t = m;
        for k in (0..l).rev() {
            let d = back[k][t];
            segments.push(Segment { start: t - d + 1, duration: d, state: k });
            t -= d;
        }
        segments.reverse();
        let seg = Segmentation::new(segments, m)?;
        let lp = hsmm_joint_log_prob_table(&seg, &table, &self.model)?;
        Ok(Some((seg, lp)))
    }
}

type ComboKey = (PoseLabel, PoseLabel, Direction);

/// Chains per (from, to, direction); absent combinations are N/A.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLibrary {
    pub kf_params: KeyframeParams,
    pub input: ChainInput,
    chains: BTreeMap<ComboKey, TransitionChain>,
}

impl TransitionLibrary {
    pub fn new(kf_params: KeyframeParams, input: ChainInput) -> Self {
        TransitionLibrary { kf_params, input, chains: BTreeMap::new() }
    }

    pub fn insert(&mut self, from: PoseLabel, to: PoseLabel, direction: Direction, chain: TransitionChain) {
        self.chains.insert((from, to, direction), chain);
    }

    pub fn remove(&mut self, from: PoseLabel, to: PoseLabel, direction: Direction) -> Option<TransitionChain> {
        self.chains.remove(&(from, to, direction))
    }

    pub fn get(&self, from: PoseLabel, to: PoseLabel, direction: Direction) -> Option<&TransitionChain> {
        self.chains.get(&(from, to, direction))
    }

    /// Entries in lexicographic (from, to, direction) order.
    pub fn iter(&self) -> impl Iterator<Item = (&ComboKey, &TransitionChain)> {
        self.chains.iter()
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }
}

/// Chain position of keyframe `j` of `n` when folded onto `l` positions;
/// endpoints map to endpoints and every position receives a keyframe.
fn fold_position(j: usize, n: usize, l: usize) -> usize {
    if n <= 1 {
        0
    } else {
        ((j * (l - 1)) as f64 / (n - 1) as f64).round() as usize
    }
}

/// Tick ranges owned by each keyframe: the clip split halfway between
/// neighbouring keyframes.
fn keyframe_regions(ticks: &[usize], len: usize) -> Vec<(usize, usize)> {
    (0..ticks.len())
        .map(|j| {
            let lo = if j == 0 { 1 } else { (ticks[j - 1] + ticks[j]) / 2 + 1 };
            let hi = if j + 1 == ticks.len() { len } else { (ticks[j] + ticks[j + 1]) / 2 };
            (lo, hi)
        })
        .collect()
}

/// Keyframes of a clip, with [`Error::StaticClip`] mapped to
/// [`Error::NoTransitionDetected`].
fn clip_keyframes(clip: &FeatureStream, params: &KeyframeParams) -> Result<KeyframeSet> {
    match select_keyframes(clip, params) {
        Err(Error::StaticClip { .. }) => Err(Error::NoTransitionDetected),
        other => other,
    }
}

fn chain_input(clip: &FeatureStream, kf: &KeyframeSet, input: ChainInput) -> FeatureStream {
    match input {
        ChainInput::Keyframes => clip.select_ticks(&kf.ticks()),
        ChainInput::FullRate => clip.clone(),
    }
}

/// Fits one chain per (from, to, direction) present in `clips`.
///
/// The chain length is the smallest keyframe count among that combination's
/// clips; longer keyframe sets are folded onto it in order. Each position's
/// emission means average the keyframes folded onto it; durations are fitted
/// from keyframe counts per position (keyframe input) or from the tick span
/// each keyframe owns (full-rate input). Clips without motion are skipped,
/// and combinations left without clips stay N/A.
pub fn build_transition_library(
    clips: &[(&FeatureStream, PoseLabel, PoseLabel, Direction)],
    kf_params: &KeyframeParams,
    input: ChainInput,
) -> Result<TransitionLibrary> {
    let mut groups: BTreeMap<ComboKey, Vec<(&FeatureStream, KeyframeSet)>> = BTreeMap::new();
    for &(clip, from, to, dir) in clips {
        match clip_keyframes(clip, kf_params) {
            Ok(kf) => groups.entry((from, to, dir)).or_default().push((clip, kf)),
            Err(Error::NoTransitionDetected) => continue,
            Err(e) => return Err(e),
        }
    }
    let mut library = TransitionLibrary::new(*kf_params, input);
    for ((from, to, dir), group) in groups {
        let l = group.iter().map(|(_, kf)| kf.len()).min().expect("group is non-empty");
        let mut streams = Vec::with_capacity(group.len());
        let mut labels = Vec::with_capacity(group.len());
        let mut durations: Vec<Vec<f64>> = vec![Vec::new(); l];
        let mut longest = 1;
        for (clip, kf) in &group {
            let n = kf.len();
            let positions: Vec<usize> = (0..n).map(|j| fold_position(j, n, l)).collect();
            streams.push(clip.select_ticks(&kf.ticks()));
            labels.push(positions.clone());
            let mut per_position = vec![0usize; l];
            match input {
                ChainInput::Keyframes => positions.iter().for_each(|&p| per_position[p] += 1),
                ChainInput::FullRate => {
                    for ((lo, hi), &p) in keyframe_regions(&kf.ticks(), clip.len()).into_iter().zip(&positions) {
                        per_position[p] += hi + 1 - lo;
                    }
                }
            }
            durations.iter_mut().zip(&per_position).for_each(|(v, &c)| v.push(c as f64));
            longest = longest.max(per_position.iter().copied().max().unwrap_or(1));
        }
        let data: Vec<(&FeatureStream, &[usize])> =
            streams.iter().zip(&labels).map(|(s, y)| (s, y.as_slice())).collect();
        let emissions = fit_emissions(&data, l, false)?;
        let d_max = match input {
            ChainInput::Keyframes => kf_params.k_max,
            ChainInput::FullRate => group.iter().map(|(c, _)| c.len()).max().unwrap_or(1).max(longest),
        };
        let dists = durations
            .iter()
            .map(|xs| {
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                DurationDist::Gaussian { mean, std: var.sqrt().max(DURATION_STD_FLOOR) }
            })
            .collect();
        let chain = TransitionChain::new(from, to, DurationModel::new(dists, d_max)?, emissions)?;
        library.insert(from, to, dir, chain);
    }
    Ok(library)
}

/// Scores the clip against every chain in the library and returns the best.
///
/// Ties (within `1e-12` relative) go to the shorter chain, then to the
/// lexicographically smaller (from, to, direction).
pub fn classify_transition(clip: &FeatureStream, library: &TransitionLibrary) -> Result<TransitionRecord> {
    let kf = clip_keyframes(clip, &library.kf_params)?;
    let input = chain_input(clip, &kf, library.input);
    let mut best: Option<TransitionRecord> = None;
    for (&(from, to, direction), chain) in library.iter() {
        let Some((_, lp)) = chain.align(&input)? else {
            continue;
        };
        let better = match &best {
            None => lp > f64::NEG_INFINITY,
            Some(b) => {
                let tol = 1e-12 * b.log_prob.abs().max(1.0);
                lp > b.log_prob + tol || ((lp - b.log_prob).abs() <= tol && chain.len() < b.n_pseudo_poses)
            }
        };
        if better {
            best = Some(TransitionRecord { from, to, direction, log_prob: lp, n_pseudo_poses: chain.len() });
        }
    }
    best.ok_or(Error::NoTransitionDetected)
}
