//! Multimodal multiview keyframe selection.
//!
//! A transition clip is compressed into at most `k_max` frames in three
//! stages:
//!
//! 1. pick the channel whose first and last frames differ most; the clip
//!    counts as motion only if that dissimilarity exceeds the endpoint
//!    threshold, and both endpoints are admitted;
//! 2. admit up to `k_max - 3` interior frames that are far from *both*
//!    endpoints (score `min(d_first, d_last)`, maximized over channels),
//!    keeping only candidates scoring at least `ratio_threshold` times the
//!    best candidate and at least `ceil(N / k_max)` ticks from every admitted
//!    frame;
//! 3. between the second and second-to-last keyframes (or inside the widest
//!    gap when fewer than four frames are admitted) add the motion peak, the
//!    frame farthest from both neighbours.
//!
//! Distances are Euclidean divided by `sqrt(F)`, so they lie in `[0, 1]` for
//! features in `[0, 1]` and thresholds do not depend on the feature size.

use crate::emission::{ChannelId, FeatureStream};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keyframe {
    /// 1-based tick within the clip.
    pub tick: usize,
    /// Selection stage that admitted the frame: 1 (endpoints), 2
    /// (complementary frames) or 3 (motion peak).
    pub stage: u8,
    /// Channel on which the frame was judged.
    pub channel: ChannelId,
    /// Dissimilarity that admitted the frame.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyframeSet {
    /// Sorted by tick.
    pub frames: Vec<Keyframe>,
    pub k_max: usize,
    pub threshold: f64,
}

impl KeyframeSet {
    pub fn ticks(&self) -> Vec<usize> {
        self.frames.iter().map(|k| k.tick).collect()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyframeParams {
    pub k_max: usize,
    /// Stage-1 minimum endpoint dissimilarity.
    pub endpoint_threshold: f64,
    /// Stage-2 acceptance ratio relative to the best candidate.
    pub ratio_threshold: f64,
}

impl Default for KeyframeParams {
    fn default() -> Self {
        KeyframeParams { k_max: 5, endpoint_threshold: 0.8, ratio_threshold: 0.8 }
    }
}

impl KeyframeParams {
    pub fn with_k_max(self, k_max: usize) -> Self {
        KeyframeParams { k_max, ..self }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sq / a.len().max(1) as f64).sqrt()
}

/// Normalized distance between the first and last frame on one channel.
pub fn channel_endpoint_dissimilarity(clip: &FeatureStream, channel: ChannelId) -> Result<f64> {
    if clip.len() < 2 {
        return Err(Error::InvalidParameter("clip needs at least two frames".into()));
    }
    let pos = clip.channel_position(channel).ok_or(Error::ChannelAbsent(channel))?;
    let first = clip.frame(1).get(pos).ok_or(Error::ChannelAbsent(channel))?;
    let last = clip.frame(clip.len()).get(pos).ok_or(Error::ChannelAbsent(channel))?;
    Ok(distance(first, last))
}

/// Distance on channel `pos` between ticks `a` and `b`, if both were observed.
fn pair_distance(clip: &FeatureStream, pos: usize, a: usize, b: usize) -> Option<f64> {
    Some(distance(clip.frame(a).get(pos)?, clip.frame(b).get(pos)?))
}

/// Best `min(d(n, a), d(n, b))` over channels observed at `n`, `a` and `b`.
fn farthest_from_both(clip: &FeatureStream, n: usize, a: usize, b: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for pos in 0..clip.channels().len() {
        let (Some(da), Some(db)) = (pair_distance(clip, pos, n, a), pair_distance(clip, pos, n, b)) else {
            continue;
        };
        let score = da.min(db);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((pos, score));
        }
    }
    best
}

/// Selects at most `params.k_max` keyframes; see the module docs.
///
/// Returns [`Error::StaticClip`] (carrying the two endpoints) when no channel
/// moves more than the endpoint threshold.
pub fn select_keyframes(clip: &FeatureStream, params: &KeyframeParams) -> Result<KeyframeSet> {
    let n = clip.len();
    if n < 2 {
        return Err(Error::InvalidParameter("clip needs at least two frames".into()));
    }
    if params.k_max < 2 {
        return Err(Error::InvalidParameter("k_max must be at least 2".into()));
    }
    for th in [params.endpoint_threshold, params.ratio_threshold] {
        if !(th > 0.0 && th < 1.0) {
            return Err(Error::InvalidParameter(format!("threshold {th} outside (0, 1)")));
        }
    }
    let channels = clip.channels();

    // stage 1: channel with the most endpoint motion
    let mut stage1: Option<(usize, f64)> = None;
    for pos in 0..channels.len() {
        if let Some(d) = pair_distance(clip, pos, 1, n) {
            if stage1.is_none_or(|(_, best)| d > best) {
                stage1 = Some((pos, d));
            }
        }
    }
    let (pos1, d1) = stage1.unwrap_or((0, 0.0));
    let endpoint = |tick| Keyframe { tick, stage: 1, channel: channels[pos1], score: d1 };
    let mut frames = vec![endpoint(1), endpoint(n)];
    if d1 <= params.endpoint_threshold {
        let endpoints = KeyframeSet { frames, k_max: params.k_max, threshold: params.endpoint_threshold };
        return Err(Error::StaticClip { endpoints: Box::new(endpoints) });
    }

    // stage 2: interior frames complementary to both endpoints
    let slots = params.k_max.saturating_sub(3);
    if slots > 0 {
        let mut candidates: Vec<Keyframe> = (2..n)
            .filter_map(|t| {
                farthest_from_both(clip, t, 1, n).map(|(pos, score)| Keyframe {
                    tick: t,
                    stage: 2,
                    channel: channels[pos],
                    score,
                })
            })
            .filter(|k| k.score > 0.0)
            .collect();
        candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.tick.cmp(&b.tick)));
        let gap = n.div_ceil(params.k_max);
        if let Some(top) = candidates.first().map(|k| k.score) {
            let mut admitted = 0;
            for cand in candidates {
                if admitted == slots || cand.score < params.ratio_threshold * top {
                    break;
                }
                if frames.iter().all(|k| k.tick.abs_diff(cand.tick) >= gap) {
                    frames.push(cand);
                    admitted += 1;
                }
            }
        }
        frames.sort_by_key(|k| k.tick);
    }

    // stage 3: motion peak between the inner keyframes
    if frames.len() < params.k_max {
        let (lo, hi) = if frames.len() >= 4 {
            (frames[1].tick, frames[frames.len() - 2].tick)
        } else {
            frames.windows(2).map(|w| (w[0].tick, w[1].tick)).fold((0, 0), |acc, w| {
                if w.1 - w.0 > acc.1 - acc.0 {
                    w
                } else {
                    acc
                }
            })
        };
        let mut peak: Option<Keyframe> = None;
        for t in (lo + 1)..hi {
            if frames.iter().any(|k| k.tick == t) {
                continue;
            }
            if let Some((pos, score)) = farthest_from_both(clip, t, lo, hi) {
                if peak.is_none_or(|p| score > p.score) {
                    peak = Some(Keyframe { tick: t, stage: 3, channel: channels[pos], score });
                }
            }
        }
        if let Some(p) = peak.filter(|p| p.score > 0.0) {
            frames.push(p);
            frames.sort_by_key(|k| k.tick);
        }
    }

    Ok(KeyframeSet { frames, k_max: params.k_max, threshold: params.endpoint_threshold })
}

/// Keyframe frames as a short stream, with the clip ticks they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPoseStream {
    pub stream: FeatureStream,
    pub source_ticks: Vec<usize>,
}

/// All channels at the keyframe ticks, in tick order.
pub fn keyframes_to_pseudo_pose_stream(clip: &FeatureStream, kf: &KeyframeSet) -> Result<PseudoPoseStream> {
    let ticks = kf.ticks();
    if ticks.windows(2).any(|w| w[0] >= w[1]) || ticks.iter().any(|&t| t == 0 || t > clip.len()) {
        return Err(Error::InvalidParameter("keyframes do not belong to this clip".into()));
    }
    Ok(PseudoPoseStream { stream: clip.select_ticks(&ticks), source_ticks: ticks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emission::{FeatureFrame, Modality, View};

    const A: ChannelId = ChannelId::new(View::Left, Modality::Rgb);
    const B: ChannelId = ChannelId::new(View::Right, Modality::Depth);

    fn clip(rows: Vec<Vec<Vec<f64>>>, channels: Vec<ChannelId>) -> FeatureStream {
        let dim = rows[0][0].len();
        let frames = rows
            .into_iter()
            .enumerate()
            .map(|(t, values)| FeatureFrame { tick: t + 1, available: vec![true; values.len()], values })
            .collect();
        FeatureStream::new(channels, dim, frames).unwrap()
    }

    /// One channel moving linearly from `start` to `end` over `n` frames.
    fn linear_clip(n: usize, start: &[f64], end: &[f64]) -> FeatureStream {
        let rows = (0..n)
            .map(|i| {
                let w = i as f64 / (n - 1) as f64;
                vec![start.iter().zip(end).map(|(a, b)| a + w * (b - a)).collect()]
            })
            .collect();
        clip(rows, vec![A])
    }

    #[test]
    fn endpoint_dissimilarity_closed_forms() {
        let c = linear_clip(3, &[0.0; 4], &[1.0; 4]);
        assert_eq!(channel_endpoint_dissimilarity(&c, A).unwrap(), 1.0);
        let still = linear_clip(3, &[0.3; 4], &[0.3; 4]);
        assert_eq!(channel_endpoint_dissimilarity(&still, A).unwrap(), 0.0);
        assert!(matches!(channel_endpoint_dissimilarity(&c, B), Err(Error::ChannelAbsent(_))));
    }

    #[test]
    fn endpoint_dissimilarity_matches_scalar_oracle() {
        let start = [0.1, 0.9, 0.4, 0.0, 0.7];
        let end = [0.6, 0.2, 0.4, 1.0, 0.1];
        let c = linear_clip(6, &start, &end);
        let mut sq = 0.0;
        for k in 0..5 {
            sq += (start[k] - end[k]) * (start[k] - end[k]);
        }
        let expected = sq.sqrt() / 5f64.sqrt();
        assert!((channel_endpoint_dissimilarity(&c, A).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn identical_frames_are_static() {
        let c = linear_clip(6, &[0.5; 3], &[0.5; 3]);
        match select_keyframes(&c, &KeyframeParams::default()) {
            Err(Error::StaticClip { endpoints }) => assert_eq!(endpoints.ticks(), vec![1, 6]),
            other => panic!("expected a static clip, got {other:?}"),
        }
    }

    #[test]
    fn linear_ramp_midpoint_is_the_motion_peak() {
        // geometry: frame n sits (n-1)/19 of the way from start to end, so
        // min(d_first, d_last) peaks at n = 10.5 and ties 10 with 11
        let c = linear_clip(20, &[1.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 1.0]);
        let kf = select_keyframes(&c, &KeyframeParams::default().with_k_max(3)).unwrap();
        assert_eq!(kf.len(), 3);
        let mid = kf.frames[1];
        assert!(mid.tick == 10 || mid.tick == 11, "midpoint was {}", mid.tick);
        assert!((mid.score - 9.0 / 19.0).abs() < 1e-9);

        let kf5 = select_keyframes(&c, &KeyframeParams::default()).unwrap();
        assert!(kf5.ticks().iter().any(|&t| t == 10 || t == 11));
        assert!(kf5.len() <= 5);
    }

    #[test]
    fn channel_with_most_motion_is_chosen_for_endpoints() {
        let rows = (0..5)
            .map(|i| {
                let w = i as f64 / 4.0;
                vec![vec![0.5, 0.5], vec![w, w]]
            })
            .collect();
        let c = clip(rows, vec![A, B]);
        let kf = select_keyframes(&c, &KeyframeParams::default()).unwrap();
        assert_eq!(kf.frames[0].channel, B);
        assert_eq!(kf.frames[0].tick, 1);
        assert_eq!(kf.frames.last().unwrap().tick, 5);
    }

    #[test]
    fn pseudo_pose_stream_keeps_tick_order() {
        let c = linear_clip(20, &[1.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 1.0]);
        let kf = select_keyframes(&c, &KeyframeParams::default()).unwrap();
        let pp = keyframes_to_pseudo_pose_stream(&c, &kf).unwrap();
        assert_eq!(pp.stream.len(), kf.len());
        assert_eq!(pp.source_ticks, kf.ticks());
        assert!(pp.source_ticks.windows(2).all(|w| w[0] < w[1]));
        for (i, &t) in pp.source_ticks.iter().enumerate() {
            assert_eq!(pp.stream.frame(i + 1).values, c.frame(t).values);
        }

        let endpoints = KeyframeSet { frames: kf.frames[..1].iter().chain(kf.frames.last()).copied().collect(), ..kf };
        assert_eq!(keyframes_to_pseudo_pose_stream(&c, &endpoints).unwrap().stream.len(), 2);
    }

    #[test]
    fn parameter_validation() {
        let c = linear_clip(4, &[0.0], &[1.0]);
        assert!(select_keyframes(&c, &KeyframeParams::default().with_k_max(1)).is_err());
        let bad = KeyframeParams { endpoint_threshold: 1.0, ..KeyframeParams::default() };
        assert!(select_keyframes(&c, &bad).is_err());
        assert!(select_keyframes(&c.slice(1, 1), &KeyframeParams::default()).is_err());
    }
}
