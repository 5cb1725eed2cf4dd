//! Shared domain types: pose labels, the hidden state space, segments and
//! segmentations, duration distributions and the initial-state prior.
//!
//! Ticks are 1-based everywhere: the first frame of a stream is tick 1 and
//! a segmentation always starts with a segment at tick 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Held decubitus body configurations plus the `other` catch-all and the
/// real-ICU-only `aspiration` pose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PoseLabel {
    #[serde(rename = "solU")]
    SoldierUp,
    #[serde(rename = "fetR")]
    FetalRight,
    #[serde(rename = "fetL")]
    FetalLeft,
    #[serde(rename = "logR")]
    LogRight,
    #[serde(rename = "solD")]
    SoldierDown,
    #[serde(rename = "yeaL")]
    YearnerLeft,
    #[serde(rename = "logL")]
    LogLeft,
    #[serde(rename = "falD")]
    FallerDown,
    #[serde(rename = "falU")]
    FallerUp,
    #[serde(rename = "yeaR")]
    YearnerRight,
    #[serde(rename = "other")]
    Other,
    #[serde(rename = "aspiration")]
    Aspiration,
}

impl PoseLabel {
    /// The ten rotation poses, in prior-table order.
    pub const ROTATION: [PoseLabel; 10] = [
        PoseLabel::SoldierUp,
        PoseLabel::FetalRight,
        PoseLabel::FetalLeft,
        PoseLabel::LogRight,
        PoseLabel::SoldierDown,
        PoseLabel::YearnerLeft,
        PoseLabel::LogLeft,
        PoseLabel::FallerDown,
        PoseLabel::FallerUp,
        PoseLabel::YearnerRight,
    ];

    /// Mock-ICU labels: the rotation poses followed by `other`.
    pub const MOCK_ICU: [PoseLabel; 11] = [
        PoseLabel::SoldierUp,
        PoseLabel::FetalRight,
        PoseLabel::FetalLeft,
        PoseLabel::LogRight,
        PoseLabel::SoldierDown,
        PoseLabel::YearnerLeft,
        PoseLabel::LogLeft,
        PoseLabel::FallerDown,
        PoseLabel::FallerUp,
        PoseLabel::YearnerRight,
        PoseLabel::Other,
    ];

    pub const ALL: [PoseLabel; 12] = [
        PoseLabel::SoldierUp,
        PoseLabel::FetalRight,
        PoseLabel::FetalLeft,
        PoseLabel::LogRight,
        PoseLabel::SoldierDown,
        PoseLabel::YearnerLeft,
        PoseLabel::LogLeft,
        PoseLabel::FallerDown,
        PoseLabel::FallerUp,
        PoseLabel::YearnerRight,
        PoseLabel::Other,
        PoseLabel::Aspiration,
    ];

    /// Signed display symbol used in history logs.
    pub fn symbol(self) -> i8 {
        match self {
            PoseLabel::Aspiration => 0,
            PoseLabel::SoldierUp => 1,
            PoseLabel::SoldierDown => -1,
            PoseLabel::YearnerRight => 2,
            PoseLabel::YearnerLeft => -2,
            PoseLabel::LogRight => 3,
            PoseLabel::LogLeft => -3,
            PoseLabel::FallerUp => 4,
            PoseLabel::FallerDown => -4,
            PoseLabel::Other => 5,
            PoseLabel::FetalRight => 6,
            PoseLabel::FetalLeft => -6,
        }
    }

    pub fn from_symbol(symbol: i8) -> Option<PoseLabel> {
        PoseLabel::ALL.into_iter().find(|p| p.symbol() == symbol)
    }

    pub fn acronym(self) -> &'static str {
        match self {
            PoseLabel::SoldierUp => "solU",
            PoseLabel::FetalRight => "fetR",
            PoseLabel::FetalLeft => "fetL",
            PoseLabel::LogRight => "logR",
            PoseLabel::SoldierDown => "solD",
            PoseLabel::YearnerLeft => "yeaL",
            PoseLabel::LogLeft => "logL",
            PoseLabel::FallerDown => "falD",
            PoseLabel::FallerUp => "falU",
            PoseLabel::YearnerRight => "yeaR",
            PoseLabel::Other => "other",
            PoseLabel::Aspiration => "aspiration",
        }
    }

    /// Position in [`PoseLabel::ALL`]; used for deterministic tie-breaks.
    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PoseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.acronym())
    }
}

impl FromStr for PoseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PoseLabel::ALL
            .into_iter()
            .find(|p| p.acronym().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown pose `{s}`")))
    }
}

/// Scene regime: bright and clear, or dark and occluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SceneCondition {
    #[serde(rename = "BC")]
    Bc,
    #[serde(rename = "DO")]
    Do,
}

impl SceneCondition {
    pub const ALL: [SceneCondition; 2] = [SceneCondition::Bc, SceneCondition::Do];

    pub fn as_str(self) -> &'static str {
        match self {
            SceneCondition::Bc => "BC",
            SceneCondition::Do => "DO",
        }
    }

    pub fn other(self) -> SceneCondition {
        match self {
            SceneCondition::Bc => SceneCondition::Do,
            SceneCondition::Do => SceneCondition::Bc,
        }
    }
}

impl fmt::Display for SceneCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SceneCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BC" => Ok(SceneCondition::Bc),
            "DO" => Ok(SceneCondition::Do),
            _ => Err(Error::InvalidParameter(format!("unknown scene `{s}`"))),
        }
    }
}

/// One hidden state. `scene` is `None` when the state space is not
/// scene-doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateId {
    pub pose: PoseLabel,
    pub scene: Option<SceneCondition>,
    pub index: usize,
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scene {
            Some(scene) => write!(f, "{}/{}", self.pose, scene),
            None => write!(f, "{}", self.pose),
        }
    }
}

/// Ordered, densely indexed set of hidden states.
///
/// Scene-doubled spaces are scene-major: every BC state first, then every DO
/// state, each block in the order the poses were given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    states: Vec<StateId>,
}

impl StateSpace {
    pub fn new(poses: &[PoseLabel], scene_doubling: bool) -> Self {
        let pairs: Vec<_> = if scene_doubling {
            SceneCondition::ALL.iter().flat_map(|&s| poses.iter().map(move |&p| (p, Some(s)))).collect()
        } else {
            poses.iter().map(|&p| (p, None)).collect()
        };
        Self::from_pairs(pairs)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (PoseLabel, Option<SceneCondition>)>) -> Self {
        let states =
            pairs.into_iter().enumerate().map(|(index, (pose, scene))| StateId { pose, scene, index }).collect();
        StateSpace { states }
    }

    /// `q` states drawn from the mock-ICU poses (scene-doubled when `q > 11`),
    /// for models whose states carry no particular meaning.
    pub fn generic(q: usize) -> Self {
        let n = PoseLabel::MOCK_ICU.len();
        if q <= n {
            Self::new(&PoseLabel::MOCK_ICU[..q], false)
        } else {
            Self::from_pairs(
                SceneCondition::ALL
                    .iter()
                    .flat_map(|&s| PoseLabel::MOCK_ICU.iter().map(move |&p| (p, Some(s))))
                    .chain(std::iter::repeat((PoseLabel::Other, None)))
                    .take(q),
            )
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&StateId> {
        self.states.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &StateId> {
        self.states.iter()
    }

    pub fn index_of(&self, pose: PoseLabel, scene: Option<SceneCondition>) -> Option<usize> {
        self.states.iter().position(|s| s.pose == pose && s.scene == scene)
    }

    pub fn is_scene_doubled(&self) -> bool {
        self.states.iter().any(|s| s.scene.is_some())
    }
}

/// Maximal run of one state: starts at `start` (1-based), lasts `duration`
/// ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: usize,
    pub duration: usize,
    pub state: usize,
}

impl Segment {
    /// Last tick covered by the segment (inclusive).
    pub fn end(&self) -> usize {
        self.start + self.duration - 1
    }
}

/// Complete, gap-free cover of ticks `1..=len` by maximal runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segmentation {
    segments: Vec<Segment>,
    len: usize,
}

impl Segmentation {
    /// Validates every segmentation invariant.
    pub fn new(segments: Vec<Segment>, len: usize) -> Result<Self> {
        let malformed = |msg: String| Err(Error::MalformedSegmentation(msg));
        if segments.is_empty() {
            return malformed("no segments".into());
        }
        let mut next = 1;
        for (u, seg) in segments.iter().enumerate() {
            if seg.duration == 0 {
                return malformed(format!("segment {u} has zero duration"));
            }
            if seg.start != next {
                return malformed(format!(
                    "segment {u} starts at {} but the previous one ends at {}",
                    seg.start,
                    next - 1
                ));
            }
            if u > 0 && segments[u - 1].state == seg.state {
                return malformed(format!("segments {} and {u} share state {}", u - 1, seg.state));
            }
            next += seg.duration;
        }
        if next - 1 != len {
            return malformed(format!("segments cover {} ticks, expected {len}", next - 1));
        }
        Ok(Segmentation { segments, len })
    }

    /// Run-length encodes a label sequence.
    pub fn encode(labels: &[usize]) -> Result<Self> {
        let first = *labels.first().ok_or(Error::EmptySequence)?;
        let mut segments = vec![Segment { start: 1, duration: 1, state: first }];
        for (t, &y) in labels.iter().enumerate().skip(1) {
            let last = segments.last_mut().expect("non-empty");
            if last.state == y {
                last.duration += 1;
            } else {
                segments.push(Segment { start: t + 1, duration: 1, state: y });
            }
        }
        Ok(Segmentation { segments, len: labels.len() })
    }

    /// Expands back into one label per tick.
    pub fn decode(&self) -> Vec<usize> {
        let mut labels = Vec::with_capacity(self.len);
        for seg in &self.segments {
            labels.extend(std::iter::repeat_n(seg.state, seg.duration));
        }
        labels
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max_duration(&self) -> usize {
        self.segments.iter().map(|s| s.duration).max().unwrap_or(0)
    }
}

/// Run-length encoding of a label sequence into segments.
pub fn encode_segments(labels: &[usize]) -> Result<Segmentation> {
    Segmentation::encode(labels)
}

/// Inverse of [`encode_segments`]; re-validates its input.
pub fn decode_segments(segments: &[Segment], len: usize) -> Result<Vec<usize>> {
    Ok(Segmentation::new(segments.to_vec(), len)?.decode())
}

/// `a^(d-1) (1-a)`: dwell-time law implied by a self-transition probability.
pub fn geometric_duration_pmf(self_loop: f64, duration: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&self_loop) {
        return Err(Error::InvalidParameter(format!("self-loop probability {self_loop}")));
    }
    if self_loop == 1.0 {
        return Err(Error::DegenerateSelfLoop);
    }
    if duration == 0 {
        return Err(Error::DurationOutOfRange { duration, d_max: usize::MAX });
    }
    Ok(self_loop.powi(duration as i32 - 1) * (1.0 - self_loop))
}

/// Per-state dwell-time law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DurationDist {
    /// Gaussian density evaluated at integer ticks, renormalized on `[1, d_max]`.
    Gaussian { mean: f64, std: f64 },
    /// Untruncated geometric law; its mass beyond `d_max` is simply lost.
    Geometric { self_loop: f64 },
}

/// Per-state duration distributions sharing one maximum duration, with
/// log-pmf and log-survival tables precomputed on `[1, d_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationModel {
    dists: Vec<DurationDist>,
    d_max: usize,
    log_pmf: Vec<Vec<f64>>,
    log_survival: Vec<Vec<f64>>,
}

impl DurationModel {
    pub fn new(dists: Vec<DurationDist>, d_max: usize) -> Result<Self> {
        if d_max == 0 {
            return Err(Error::InvalidParameter("d_max must be at least 1".into()));
        }
        let mut log_pmf = Vec::with_capacity(dists.len());
        let mut log_survival = Vec::with_capacity(dists.len());
        for dist in &dists {
            let (pmf, surv) = match *dist {
                DurationDist::Gaussian { mean, std } => {
                    if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "gaussian duration needs finite mean and std > 0, got ({mean}, {std})"
                        )));
                    }
                    gaussian_tables(mean, std, d_max)
                }
                DurationDist::Geometric { self_loop } => {
                    geometric_duration_pmf(self_loop, 1)?;
                    geometric_tables(self_loop, d_max)
                }
            };
            log_pmf.push(pmf);
            log_survival.push(surv);
        }
        Ok(DurationModel { dists, d_max, log_pmf, log_survival })
    }

    pub fn gaussian(params: &[(f64, f64)], d_max: usize) -> Result<Self> {
        Self::new(params.iter().map(|&(mean, std)| DurationDist::Gaussian { mean, std }).collect(), d_max)
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn dists(&self) -> &[DurationDist] {
        &self.dists
    }

    pub fn num_states(&self) -> usize {
        self.dists.len()
    }

    /// `P_state(duration)`.
    pub fn pmf(&self, state: usize, duration: usize) -> Result<f64> {
        Ok(self.checked_log_pmf(state, duration)?.exp())
    }

    pub fn checked_log_pmf(&self, state: usize, duration: usize) -> Result<f64> {
        if duration == 0 || duration > self.d_max {
            return Err(Error::DurationOutOfRange { duration, d_max: self.d_max });
        }
        self.log_pmf
            .get(state)
            .map(|row| row[duration - 1])
            .ok_or_else(|| Error::InvalidParameter(format!("no duration law for state {state}")))
    }

    /// Unchecked; `1 <= duration <= d_max`.
    pub(crate) fn log_pmf(&self, state: usize, duration: usize) -> f64 {
        self.log_pmf[state][duration - 1]
    }

    /// `log P_state(D >= duration)`; unchecked like [`Self::log_pmf`].
    pub(crate) fn log_survival(&self, state: usize, duration: usize) -> f64 {
        self.log_survival[state][duration - 1]
    }

    /// Mean of the tabulated pmf on `[1, d_max]`.
    pub fn tabulated_mean(&self, state: usize) -> f64 {
        self.log_pmf[state].iter().enumerate().map(|(i, lp)| (i + 1) as f64 * lp.exp()).sum()
    }
}

/// Discretized Gaussian duration probability, renormalized on `[1, d_max]`.
pub fn gaussian_duration_pmf(model: &DurationModel, state: usize, duration: usize) -> Result<f64> {
    model.pmf(state, duration)
}

fn gaussian_tables(mean: f64, std: f64, d_max: usize) -> (Vec<f64>, Vec<f64>) {
    let log_w: Vec<f64> = (1..=d_max)
        .map(|d| {
            let z = (d as f64 - mean) / std;
            -0.5 * z * z
        })
        .collect();
    let lse = log_sum_exp(&log_w);
    let log_pmf: Vec<f64> = log_w.iter().map(|w| w - lse).collect();
    let mut log_survival = vec![0.0; d_max];
    for d in (0..d_max).rev() {
        log_survival[d] = if d + 1 == d_max { log_pmf[d] } else { log_add(log_pmf[d], log_survival[d + 1]) };
    }
    log_survival[0] = 0.0;
    (log_pmf, log_survival)
}

fn geometric_tables(self_loop: f64, d_max: usize) -> (Vec<f64>, Vec<f64>) {
    let log_a = self_loop.ln();
    let log_exit = (1.0 - self_loop).ln();
    let times = |d: usize, la: f64| if d == 1 { 0.0 } else { (d - 1) as f64 * la };
    let log_pmf = (1..=d_max).map(|d| times(d, log_a) + log_exit).collect();
    let log_survival = (1..=d_max).map(|d| times(d, log_a)).collect();
    (log_pmf, log_survival)
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Prior-table entries `(pose, BC probability, DO probability)`; these sum
/// to 1.049, not 1.
pub const PRIOR_TABLE: [(PoseLabel, f64, f64); 11] = [
    (PoseLabel::SoldierUp, 0.03, 0.02),
    (PoseLabel::FetalRight, 0.145, 0.07),
    (PoseLabel::FetalLeft, 0.145, 0.07),
    (PoseLabel::LogRight, 0.05, 0.03),
    (PoseLabel::SoldierDown, 0.02, 0.01),
    (PoseLabel::YearnerLeft, 0.04, 0.02),
    (PoseLabel::LogLeft, 0.05, 0.03),
    (PoseLabel::FallerDown, 0.05, 0.02),
    (PoseLabel::FallerUp, 0.05, 0.03),
    (PoseLabel::YearnerRight, 0.04, 0.02),
    (PoseLabel::Other, 0.036, 0.073),
];

/// Un-normalized prior for a state; scene-less states sum both scenes.
/// `aspiration` has no tabulated prior and gets 0.
pub fn raw_prior(pose: PoseLabel, scene: Option<SceneCondition>) -> f64 {
    PRIOR_TABLE
        .iter()
        .find(|(p, _, _)| *p == pose)
        .map(|&(_, bc, dark)| match scene {
            Some(SceneCondition::Bc) => bc,
            Some(SceneCondition::Do) => dark,
            None => bc + dark,
        })
        .unwrap_or(0.0)
}

/// Probability of the first segment's state.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution {
    probs: Vec<f64>,
}

impl InitialDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("empty initial distribution".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidModel("initial probabilities must be finite and >= 0".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("initial probabilities sum to {sum}")));
        }
        Ok(InitialDistribution { probs })
    }

    pub fn uniform(q: usize) -> Self {
        InitialDistribution { probs: vec![1.0 / q as f64; q] }
    }

    /// Prior-table values for each state, divided by their total.
    pub fn from_prior_table(states: &StateSpace) -> Result<Self> {
        let mut probs: Vec<f64> = states.iter().map(|s| raw_prior(s.pose, s.scene)).collect();
        if !normalize(&mut probs) {
            return Err(Error::InvalidModel("state space has no prior mass".into()));
        }
        Ok(InitialDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Prior over the mock-ICU state space ([`StateSpace::new`] over
/// [`PoseLabel::MOCK_ICU`]).
pub fn build_initial_distribution(scene_doubling: bool) -> InitialDistribution {
    InitialDistribution::from_prior_table(&StateSpace::new(&PoseLabel::MOCK_ICU, scene_doubling))
        .expect("prior table has positive mass")
}

/// Divides by the total. When the leading entries already hold at least half
/// the mass, the last entry is set to the exact complement so that a
/// left-to-right sum is exactly 1. Returns `false` for zero total mass.
pub(crate) fn normalize(values: &mut [f64]) -> bool {
    let total: f64 = values.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return false;
    }
    values.iter_mut().for_each(|v| *v /= total);
    if let Some((last, head)) = values.split_last_mut() {
        let prefix: f64 = head.iter().sum();
        if (0.5..=1.0).contains(&prefix) && *last > 0.0 {
            *last = 1.0 - prefix;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_worked_example_encodes() {
        let seg = Segmentation::encode(&[1, 1, 1, 2, 2, 1, 2, 2]).unwrap();
        let triples: Vec<_> = seg.segments().iter().map(|s| (s.start, s.duration, s.state)).collect();
        assert_eq!(triples, vec![(1, 3, 1), (4, 2, 2), (6, 1, 1), (7, 2, 2)]);
        assert_eq!(seg.decode(), vec![1, 1, 1, 2, 2, 1, 2, 2]);
    }

    #[test]
    fn trivial_encodings() {
        let one = Segmentation::encode(&[3]).unwrap();
        assert_eq!(one.segments(), &[Segment { start: 1, duration: 1, state: 3 }]);
        let run = Segmentation::encode(&[1, 1]).unwrap();
        assert_eq!(run.segments(), &[Segment { start: 1, duration: 2, state: 1 }]);
        assert!(matches!(Segmentation::encode(&[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn decode_rejects_adjacent_equal_states() {
        let segs = [Segment { start: 1, duration: 2, state: 2 }, Segment { start: 3, duration: 2, state: 2 }];
        assert!(matches!(decode_segments(&segs, 4), Err(Error::MalformedSegmentation(_))));
    }

    #[test]
    fn decode_rejects_gaps_and_bad_cover() {
        let gap = [Segment { start: 1, duration: 2, state: 0 }, Segment { start: 4, duration: 1, state: 1 }];
        assert!(decode_segments(&gap, 4).is_err());
        let late = [Segment { start: 2, duration: 2, state: 0 }];
        assert!(decode_segments(&late, 3).is_err());
        let short = [Segment { start: 1, duration: 2, state: 0 }];
        assert!(decode_segments(&short, 3).is_err());
        let zero = [Segment { start: 1, duration: 0, state: 0 }];
        assert!(decode_segments(&zero, 0).is_err());
    }

    #[test]
    fn geometric_closed_forms() {
        assert_eq!(geometric_duration_pmf(0.5, 1).unwrap(), 0.5);
        assert_eq!(geometric_duration_pmf(0.5, 3).unwrap(), 0.125);
        assert_eq!(geometric_duration_pmf(0.0, 1).unwrap(), 1.0);
        assert!(matches!(geometric_duration_pmf(1.0, 2), Err(Error::DegenerateSelfLoop)));
    }

    #[test]
    fn geometric_partial_sums() {
        for a in [0.1f64, 0.5, 0.9] {
            let partial: f64 = (1..=50).map(|d| geometric_duration_pmf(a, d).unwrap()).sum();
            assert!((partial - (1.0 - a.powi(50))).abs() < 1e-12, "a = {a}");
        }
    }

    #[test]
    fn gaussian_flat_limit() {
        let model = DurationModel::gaussian(&[(2.0, 1e6)], 4).unwrap();
        for d in 1..=4 {
            assert!((model.pmf(0, d).unwrap() - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn gaussian_mode_at_mean() {
        let model = DurationModel::gaussian(&[(3.0, 0.5)], 5).unwrap();
        let best = (1..=5).max_by(|&a, &b| model.pmf(0, a).unwrap().total_cmp(&model.pmf(0, b).unwrap())).unwrap();
        assert_eq!(best, 3);
    }

    #[test]
    fn gaussian_matches_direct_summation() {
        // oracle: normalize exp(-(d-mu)^2 / 2 sigma^2) over d = 1..=6 directly
        let (mu, sigma) = (2.5f64, 1.0f64);
        let weight = |d: f64| (-(d - mu).powi(2) / (2.0 * sigma * sigma)).exp();
        let total: f64 = (1..=6).map(|d| weight(d as f64)).sum();
        let expected = weight(2.0) / total;
        let model = DurationModel::gaussian(&[(mu, sigma)], 6).unwrap();
        assert!((gaussian_duration_pmf(&model, 0, 2).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn gaussian_out_of_range() {
        let model = DurationModel::gaussian(&[(2.0, 1.0)], 4).unwrap();
        assert!(matches!(model.pmf(0, 0), Err(Error::DurationOutOfRange { .. })));
        assert!(matches!(model.pmf(0, 5), Err(Error::DurationOutOfRange { .. })));
        assert!(DurationModel::gaussian(&[(2.0, 0.0)], 4).is_err());
        assert!(DurationModel::gaussian(&[(2.0, 1.0)], 0).is_err());
    }

    #[test]
    fn survival_starts_at_one_and_decreases() {
        let model = DurationModel::gaussian(&[(4.0, 2.0)], 9).unwrap();
        assert_eq!(model.log_survival(0, 1), 0.0);
        for d in 2..=9 {
            assert!(model.log_survival(0, d) < model.log_survival(0, d - 1));
        }
        let tail = model.pmf(0, 9).unwrap().ln();
        assert!((model.log_survival(0, 9) - tail).abs() < 1e-12);
    }

    #[test]
    fn prior_table_values_and_total() {
        let sm = StateSpace::new(&PoseLabel::MOCK_ICU, true);
        let solu = sm.index_of(PoseLabel::SoldierUp, Some(SceneCondition::Bc)).unwrap();
        let fetr = sm.index_of(PoseLabel::FetalRight, Some(SceneCondition::Bc)).unwrap();
        assert_eq!(raw_prior(sm.get(solu).unwrap().pose, Some(SceneCondition::Bc)), 0.03);
        assert_eq!(raw_prior(sm.get(fetr).unwrap().pose, Some(SceneCondition::Bc)), 0.145);
        let raw: f64 = sm.iter().map(|s| raw_prior(s.pose, s.scene)).sum();
        assert!((raw - 1.049).abs() < 1e-12);

        let pi = build_initial_distribution(true);
        assert_eq!(pi.len(), 22);
        assert_eq!(pi.probs().iter().sum::<f64>(), 1.0);
        assert!((pi.probs()[solu] - 0.03 / 1.049).abs() < 1e-15);
    }

    #[test]
    fn prior_without_scene_doubling_sums_scenes() {
        let pi = build_initial_distribution(false);
        assert_eq!(pi.len(), 11);
        assert_eq!(pi.probs().iter().sum::<f64>(), 1.0);
        assert!((pi.probs()[1] - (0.145 + 0.07) / 1.049).abs() < 1e-15);
    }

    #[test]
    fn symbols_are_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for p in PoseLabel::ALL {
            assert!(seen.insert(p.symbol()));
            assert_eq!(PoseLabel::from_symbol(p.symbol()), Some(p));
            assert_eq!(p.acronym().parse::<PoseLabel>().unwrap(), p);
        }
        assert_eq!(PoseLabel::Aspiration.symbol(), 0);
        assert_eq!(PoseLabel::FetalLeft.symbol(), -6);
    }

    #[test]
    fn state_space_layout() {
        let sm = StateSpace::new(&PoseLabel::MOCK_ICU, true);
        assert_eq!(sm.len(), 22);
        assert_eq!(sm.get(0).unwrap().scene, Some(SceneCondition::Bc));
        assert_eq!(sm.get(11).unwrap().scene, Some(SceneCondition::Do));
        assert!(sm.iter().enumerate().all(|(i, s)| s.index == i));
        assert_eq!(StateSpace::new(&PoseLabel::MOCK_ICU, false).len(), 11);
        assert_eq!(StateSpace::generic(3).len(), 3);
        assert_eq!(StateSpace::generic(22).len(), 22);
    }
}
