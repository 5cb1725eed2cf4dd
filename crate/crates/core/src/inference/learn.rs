//! Fully supervised maximum-likelihood fitting from labelled streams.

use crate::emission::{fit_emissions, FeatureStream};
use crate::error::{Error, Result};
use crate::model::{DurationDist, DurationModel, InitialDistribution, Segmentation, StateSpace};

use super::{HsmmModel, TransitionMatrix};

/// Smallest fitted duration standard deviation, in ticks.
pub const DURATION_STD_FLOOR: f64 = 0.5;

/// Frame-level transition counts `a_ij = n(i -> j) / n(i -> .)`. Rows without
/// any outgoing pair fall back to uniform.
pub fn fit_transitions(labels: &[usize], num_states: usize) -> Result<TransitionMatrix> {
    let mut counts = vec![vec![0usize; num_states]; num_states];
    for pair in labels.windows(2) {
        check_state(pair[0], num_states)?;
        check_state(pair[1], num_states)?;
        counts[pair[0]][pair[1]] += 1;
    }
    TransitionMatrix::new(normalize_counts(counts, false))
}

/// Segment-level transitions counted between consecutive segments, so the
/// diagonal is structurally zero. Rows without data are uniform over the
/// other states.
pub fn fit_segment_transitions(segmentations: &[&Segmentation], num_states: usize) -> Result<TransitionMatrix> {
    let mut counts = vec![vec![0usize; num_states]; num_states];
    for seg in segmentations {
        for pair in seg.segments().windows(2) {
            check_state(pair[0].state, num_states)?;
            check_state(pair[1].state, num_states)?;
            counts[pair[0].state][pair[1].state] += 1;
        }
    }
    TransitionMatrix::new_segmental(normalize_counts(counts, true))
}

fn normalize_counts(counts: Vec<Vec<usize>>, segmental: bool) -> Vec<Vec<f64>> {
    let q = counts.len();
    counts
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let total: usize = row.iter().sum();
            if total > 0 {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            } else if segmental {
                if q == 1 {
                    vec![0.0]
                } else {
                    (0..q).map(|j| if j == i { 0.0 } else { 1.0 / (q - 1) as f64 }).collect()
                }
            } else {
                vec![1.0 / q as f64; q]
            }
        })
        .collect()
}

fn check_state(state: usize, num_states: usize) -> Result<()> {
    if state >= num_states {
        return Err(Error::InvalidParameter(format!("state {state} outside {num_states} states")));
    }
    Ok(())
}

/// Per-state Gaussian duration fit: sample mean and population standard
/// deviation of segment durations, the latter floored at
/// [`DURATION_STD_FLOOR`]. States without segments get `(d_max / 2, d_max / 4)`.
pub fn fit_durations(segmentations: &[&Segmentation], num_states: usize, d_max: usize) -> Result<DurationModel> {
    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); num_states];
    for seg in segmentations {
        for s in seg.segments() {
            check_state(s.state, num_states)?;
            samples[s.state].push(s.duration as f64);
        }
    }
    let dists = samples
        .iter()
        .map(|xs| {
            let (mean, std) = if xs.is_empty() {
                (d_max as f64 / 2.0, d_max as f64 / 4.0)
            } else {
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            };
            DurationDist::Gaussian { mean, std: std.max(DURATION_STD_FLOOR) }
        })
        .collect();
    DurationModel::new(dists, d_max)
}

/// Three times the largest mean duration, capped at the longest training
/// sequence.
pub fn default_d_max(durations: &DurationModel, longest: usize) -> usize {
    let widest = durations
        .dists()
        .iter()
        .map(|d| match *d {
            DurationDist::Gaussian { mean, .. } => mean,
            DurationDist::Geometric { self_loop } => 1.0 / (1.0 - self_loop),
        })
        .fold(1.0f64, f64::max);
    ((3.0 * widest).ceil() as usize).clamp(1, longest.max(1))
}

/// Where the trained model's initial distribution comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum InitialSource {
    /// Literature prior table, renormalized over the state space.
    #[default]
    PriorTable,
    /// First-segment counts of the training sequences (uniform if none).
    Empirical,
    Uniform,
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    /// Maximum duration; [`default_d_max`] when `None`.
    pub d_max: Option<usize>,
    /// Threshold features at 0.5 before fitting and scoring.
    pub binarize: bool,
    pub initial: InitialSource,
}

/// Fits emissions, segment transitions and durations from labelled streams.
pub fn train_hsmm(
    data: &[(&FeatureStream, &[usize])],
    states: StateSpace,
    options: &TrainOptions,
) -> Result<HsmmModel> {
    let q = states.len();
    if data.is_empty() || data.iter().all(|(s, _)| s.is_empty()) {
        return Err(Error::EmptySequence);
    }
    let mut segmentations = Vec::with_capacity(data.len());
    for (stream, labels) in data {
        if labels.len() != stream.len() {
            return Err(Error::LabelMismatch { labels: labels.len(), ticks: stream.len() });
        }
        if !labels.is_empty() {
            segmentations.push(Segmentation::encode(labels)?);
        }
    }
    let seg_refs: Vec<&Segmentation> = segmentations.iter().collect();
    let longest = data.iter().map(|(s, _)| s.len()).max().unwrap_or(1);
    let d_max = match options.d_max {
        Some(d) => d,
        None => {
            let provisional = fit_durations(&seg_refs, q, longest)?;
            default_d_max(&provisional, longest)
        }
    };
    let durations = fit_durations(&seg_refs, q, d_max)?;
    let transitions = fit_segment_transitions(&seg_refs, q)?;
    let emissions = fit_emissions(data, q, options.binarize)?;
    let initial = match options.initial {
        InitialSource::PriorTable => InitialDistribution::from_prior_table(&states)?,
        InitialSource::Uniform => InitialDistribution::uniform(q),
        InitialSource::Empirical => {
            let mut counts = vec![0.0; q];
            for seg in &segmentations {
                counts[seg.segments()[0].state] += 1.0;
            }
            let total: f64 = counts.iter().sum();
            InitialDistribution::new(counts.iter().map(|c| c / total).collect())?
        }
    };
    HsmmModel::new(states, initial, transitions, durations, emissions)
}
