use crate::emission::{EmissionTable, FeatureStream};
use crate::error::{Error, Result};
use crate::model::{Segment, Segmentation};

use super::{DecodeResult, HsmmModel};

const NONE: usize = usize::MAX;

/// Joint log-probability of a segmentation and the stream.
///
/// The first segment enters through the initial distribution, later ones
/// through `a_{prev,next}`; each adds its duration term and the emissions of
/// ticks `start..=end`. Start points are implied by the segmentation, so
/// their Kronecker factor is always 1.
pub fn hsmm_joint_log_prob(seg: &Segmentation, stream: &FeatureStream, model: &HsmmModel) -> Result<f64> {
    let table = model.emissions.score_stream(stream)?;
    hsmm_joint_log_prob_table(seg, &table, model)
}

/// [`hsmm_joint_log_prob`] against precomputed emissions.
pub fn hsmm_joint_log_prob_table(seg: &Segmentation, table: &EmissionTable, model: &HsmmModel) -> Result<f64> {
    Ok(segment_log_probs(seg, table, model)?.iter().sum())
}

/// Per-segment contributions to the joint log-probability.
pub fn segment_log_probs(seg: &Segmentation, table: &EmissionTable, model: &HsmmModel) -> Result<Vec<f64>> {
    if seg.len() != table.ticks() {
        return Err(Error::LabelMismatch { labels: seg.len(), ticks: table.ticks() });
    }
    let q = model.num_states();
    let segments = seg.segments();
    let mut scores = Vec::with_capacity(segments.len());
    for (u, s) in segments.iter().enumerate() {
        if s.state >= q {
            return Err(Error::InvalidParameter(format!("segment state {} outside {q} states", s.state)));
        }
        if s.duration > model.d_max() {
            return Err(Error::DurationOutOfRange { duration: s.duration, d_max: model.d_max() });
        }
        let entry = if u == 0 {
            model.log_initial(s.state)
        } else {
            model.transitions.log_prob(segments[u - 1].state, s.state)
        };
        let last = u + 1 == segments.len();
        let emission: f64 = (s.start..=s.end()).map(|t| table.get(t, s.state)).sum();
        scores.push(entry + model.log_duration(s.state, s.duration, last) + emission);
    }
    Ok(scores)
}

/// Dynamic-programming tables of the segment Viterbi.
///
/// `tau[t][d][j]` is the best log-probability of `x_1..x_t` whose last
/// segment is `(t - d + 1, d, j)`, `zeta` the state of the segment before
/// it. `delta[t][j]` maximizes `tau` over durations, `phi` and `psi` hold the
/// maximizing duration and the matching previous state. Tick 0 is unused.
#[derive(Debug, Clone, Default)]
pub struct ViterbiWorkspace {
    ticks: usize,
    d_max: usize,
    states: usize,
    tau: Vec<f64>,
    zeta: Vec<usize>,
    delta: Vec<f64>,
    phi: Vec<usize>,
    psi: Vec<usize>,
}

impl ViterbiWorkspace {
    fn reset(&mut self, ticks: usize, d_max: usize, states: usize) {
        self.ticks = ticks;
        self.d_max = d_max;
        self.states = states;
        let cube = (ticks + 1) * d_max * states;
        let plane = (ticks + 1) * states;
        self.tau.clear();
        self.tau.resize(cube, f64::NEG_INFINITY);
        self.zeta.clear();
        self.zeta.resize(cube, NONE);
        self.delta.clear();
        self.delta.resize(plane, f64::NEG_INFINITY);
        self.phi.clear();
        self.phi.resize(plane, 0);
        self.psi.clear();
        self.psi.resize(plane, NONE);
    }

    #[inline]
    fn cube(&self, t: usize, d: usize, j: usize) -> usize {
        (t * self.d_max + (d - 1)) * self.states + j
    }

    #[inline]
    fn plane(&self, t: usize, j: usize) -> usize {
        t * self.states + j
    }

    pub fn tau(&self, t: usize, d: usize, j: usize) -> f64 {
        self.tau[self.cube(t, d, j)]
    }

    /// Previous segment's state, `None` for a segment starting at tick 1.
    pub fn zeta(&self, t: usize, d: usize, j: usize) -> Option<usize> {
        Some(self.zeta[self.cube(t, d, j)]).filter(|&s| s != NONE)
    }

    pub fn delta(&self, t: usize, j: usize) -> f64 {
        self.delta[self.plane(t, j)]
    }

    pub fn phi(&self, t: usize, j: usize) -> usize {
        self.phi[self.plane(t, j)]
    }

    pub fn psi(&self, t: usize, j: usize) -> Option<usize> {
        Some(self.psi[self.plane(t, j)]).filter(|&s| s != NONE)
    }
}

/// Most probable segmentation with durations up to the model's `d_max`.
///
/// Ties are broken towards the lower state index for the last segment, then
/// the longer last duration, and the same rule recursively for the segments
/// before it.
pub fn hsmm_viterbi(stream: &FeatureStream, model: &HsmmModel) -> Result<DecodeResult> {
    if stream.is_empty() {
        return Err(Error::EmptySequence);
    }
    let table = model.emissions.score_stream(stream)?;
    let mut ws = ViterbiWorkspace::default();
    hsmm_viterbi_table(&table, model, &mut ws)
}

/// [`hsmm_viterbi`] against precomputed emissions, reusing `ws`.
pub fn hsmm_viterbi_table(table: &EmissionTable, model: &HsmmModel, ws: &mut ViterbiWorkspace) -> Result<DecodeResult> {
    let big_t = table.ticks();
    if big_t == 0 {
        return Err(Error::EmptySequence);
    }
    let q = model.num_states();
    if table.states() != q {
        return Err(Error::DimensionMismatch(format!("emission table has {} states, model has {q}", table.states())));
    }
    let d_max = model.d_max().min(big_t);
    ws.reset(big_t, d_max, q);

    // entry[s * q + j]: best score of entering state j at tick s + 1, i.e.
    // max_i delta_s(i) + log a_ij, with its argmax
    let mut entry = vec![f64::NEG_INFINITY; (big_t + 1) * q];
    let mut entry_from = vec![NONE; (big_t + 1) * q];

    for t in 1..=big_t {
        let last = t == big_t;
        for j in 0..q {
            let mut emission = 0.0;
            let mut best = f64::NEG_INFINITY;
            let mut best_d = 0;
            for d in 1..=d_max.min(t) {
                emission += table.get(t - d + 1, j);
                let start = t - d;
                let (enter, prev) = if start == 0 {
                    (model.log_initial(j), NONE)
                } else {
                    (entry[start * q + j], entry_from[start * q + j])
                };
                let score = enter + model.log_duration(j, d, last) + emission;
                let idx = ws.cube(t, d, j);
                ws.tau[idx] = score;
                ws.zeta[idx] = prev;
                // `>=` keeps the longest duration among ties
                if score >= best {
                    best = score;
                    best_d = d;
                }
            }
            let p = ws.plane(t, j);
            ws.delta[p] = best;
            ws.phi[p] = best_d;
            ws.psi[p] = ws.zeta[ws.cube(t, best_d, j)];
        }
        if !last {
            for j in 0..q {
                let mut best = f64::NEG_INFINITY;
                let mut from = NONE;
                for i in 0..q {
                    let score = ws.delta[ws.plane(t, i)] + model.transitions.log_prob(i, j);
                    if score > best {
                        best = score;
                        from = i;
                    }
                }
                entry[t * q + j] = best;
                entry_from[t * q + j] = from;
            }
        }
    }

    let mut best = f64::NEG_INFINITY;
    let mut final_state = NONE;
    for j in 0..q {
        let score = ws.delta(big_t, j);
        if score > best {
            best = score;
            final_state = j;
        }
    }
    if final_state == NONE {
        return Err(Error::NoFeasiblePath);
    }

    // back-to-front, then reversed into forward order
    let mut reversed = Vec::new();
    let (mut t, mut y) = (big_t, final_state);
    while t > 0 {
        let d = ws.phi(t, y);
        reversed.push(Segment { start: t - d + 1, duration: d, state: y });
        let prev = ws.psi[ws.plane(t, y)];
        t -= d;
        y = prev;
    }
    reversed.reverse();
    let segmentation = Segmentation::new(reversed, big_t)?;
    let segment_scores = segment_log_probs(&segmentation, table, model)?;
    Ok(DecodeResult { segmentation, log_prob: best, segment_scores })
}
