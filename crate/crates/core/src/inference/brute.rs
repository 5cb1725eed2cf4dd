//! Exhaustive decoder used as a test oracle for the segment Viterbi.

use std::cmp::Ordering;

use crate::emission::FeatureStream;
use crate::error::{Error, Result};
use crate::model::{Segment, Segmentation};

use super::{hsmm::segment_log_probs, DecodeResult, HsmmModel};

/// Largest number of labellings [`brute_force_decode`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Scores every labelling of the stream and keeps the best, breaking ties
/// the same way as [`super::hsmm_viterbi`].
pub fn brute_force_decode(stream: &FeatureStream, model: &HsmmModel) -> Result<DecodeResult> {
    let big_t = stream.len();
    if big_t == 0 {
        return Err(Error::EmptySequence);
    }
    let q = model.num_states();
    let too_large = || Error::InstanceTooLarge { states: q, ticks: big_t };
    let count = u32::try_from(big_t).ok().and_then(|t| (q as u64).checked_pow(t)).ok_or_else(too_large)?;
    if count > BRUTE_FORCE_LIMIT {
        return Err(too_large());
    }
    let table = model.emissions.score_stream(stream)?;

    let mut labels = vec![0usize; big_t];
    let mut best: Option<(f64, Segmentation, Vec<f64>)> = None;
    loop {
        let seg = Segmentation::encode(&labels)?;
        if seg.max_duration() <= model.d_max() {
            let scores = segment_log_probs(&seg, &table, model)?;
            let lp: f64 = scores.iter().sum();
            let replace = match &best {
                None => lp > f64::NEG_INFINITY,
                Some((b, s, _)) => {
                    let tol = 1e-12 * b.abs().max(1.0);
                    lp > b + tol || ((lp - b).abs() <= tol && tie_order(seg.segments(), s.segments()).is_lt())
                }
            };
            if replace {
                best = Some((lp, seg, scores));
            }
        }
        // odometer increment, last tick fastest
        let mut pos = big_t;
        loop {
            if pos == 0 {
                let (log_prob, segmentation, segment_scores) = best.ok_or(Error::NoFeasiblePath)?;
                return Ok(DecodeResult { segmentation, log_prob, segment_scores });
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < q {
                break;
            }
            labels[pos] = 0;
        }
    }
}

/// Preference among equally scored segmentations: walking from the last
/// segment backwards, lower state first, then longer duration.
pub(crate) fn tie_order(a: &[Segment], b: &[Segment]) -> Ordering {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        let ord = x.state.cmp(&y.state).then(y.duration.cmp(&x.duration));
        if ord.is_ne() {
            return ord;
        }
    }
    Ordering::Equal
}
