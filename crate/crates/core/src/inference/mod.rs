//! Decoding and supervised learning for the frame-level HMM baseline and the
//! explicit-duration HSMM.
//!
//! All scores are natural-log probabilities. Zero probabilities show up as
//! `f64::NEG_INFINITY` and are never an error by themselves.

mod brute;
mod hmm;
mod hsmm;
mod learn;

pub use brute::{brute_force_decode, BRUTE_FORCE_LIMIT};
pub use hmm::{hmm_joint_log_prob, hmm_viterbi, HmmModel};
pub use hsmm::{
    hsmm_joint_log_prob, hsmm_joint_log_prob_table, hsmm_viterbi, hsmm_viterbi_table, segment_log_probs,
    ViterbiWorkspace,
};
pub use learn::{
    default_d_max, fit_durations, fit_segment_transitions, fit_transitions, train_hsmm, InitialSource, TrainOptions,
    DURATION_STD_FLOOR,
};

use crate::emission::EmissionModel;
use crate::error::{Error, Result};
use crate::model::{DurationModel, InitialDistribution, Segmentation, StateSpace};

/// Row-stochastic transition probabilities `a_ij`.
///
/// Rows sum to 1 within 1e-12, except that an all-zero row marks a state
/// with no outgoing transition (the last state of a left-to-right chain, or
/// the only state of a one-state segmental model).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
    log_rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let q = rows.len();
        if q == 0 {
            return Err(Error::InvalidModel("empty transition matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != q {
                return Err(Error::DimensionMismatch(format!(
                    "transition row {i} has {} entries, expected {q}",
                    row.len()
                )));
            }
            if row.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                return Err(Error::InvalidModel(format!("transition row {i} has an invalid entry")));
            }
            let sum: f64 = row.iter().sum();
            if sum != 0.0 && (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!("transition row {i} sums to {sum}")));
            }
        }
        let log_rows = rows.iter().map(|r| r.iter().map(|a| a.ln()).collect()).collect();
        Ok(TransitionMatrix { rows, log_rows })
    }

    /// Segment-level matrix: self-transitions must be zero because staying
    /// is expressed through durations.
    pub fn new_segmental(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self::new(rows)?;
        if !m.is_segmental() {
            return Err(Error::InvalidModel("segmental transition matrix must have a zero diagonal".into()));
        }
        Ok(m)
    }

    pub fn uniform(q: usize) -> Self {
        Self::new(vec![vec![1.0 / q as f64; q]; q]).expect("uniform rows are stochastic")
    }

    pub fn is_segmental(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| r[i] == 0.0)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    #[inline]
    pub fn log_prob(&self, from: usize, to: usize) -> f64 {
        self.log_rows[from][to]
    }
}

/// How the last segment's duration is scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FinalSegment {
    /// `P(d | y)`, like every other segment.
    #[default]
    Complete,
    /// `P(D >= d | y)`: the sequence may end while the last state is still
    /// being held (right-censored).
    Censored,
}

/// Explicit-duration HSMM parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HsmmModel {
    pub states: StateSpace,
    pub initial: InitialDistribution,
    pub transitions: TransitionMatrix,
    pub durations: DurationModel,
    pub emissions: EmissionModel,
    pub final_segment: FinalSegment,
    log_initial: Vec<f64>,
}

impl HsmmModel {
    pub fn new(
        states: StateSpace,
        initial: InitialDistribution,
        transitions: TransitionMatrix,
        durations: DurationModel,
        emissions: EmissionModel,
    ) -> Result<Self> {
        let q = states.len();
        let dims = [
            ("initial distribution", initial.len()),
            ("transition matrix", transitions.num_states()),
            ("duration model", durations.num_states()),
            ("emission model", emissions.num_states()),
        ];
        for (what, n) in dims {
            if n != q {
                return Err(Error::DimensionMismatch(format!("{what} has {n} states, state space has {q}")));
            }
        }
        if !transitions.is_segmental() {
            return Err(Error::InvalidModel("HSMM transitions must have a zero diagonal".into()));
        }
        let log_initial = initial.probs().iter().map(|p| p.ln()).collect();
        Ok(HsmmModel {
            states,
            initial,
            transitions,
            durations,
            emissions,
            final_segment: FinalSegment::Complete,
            log_initial,
        })
    }

    pub fn with_final_segment(mut self, final_segment: FinalSegment) -> Self {
        self.final_segment = final_segment;
        self
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn d_max(&self) -> usize {
        self.durations.d_max()
    }

    #[inline]
    pub(crate) fn log_initial(&self, state: usize) -> f64 {
        self.log_initial[state]
    }

    /// Duration term for a segment; `last` selects the censored form when
    /// configured.
    #[inline]
    pub(crate) fn log_duration(&self, state: usize, duration: usize, last: bool) -> f64 {
        if last && self.final_segment == FinalSegment::Censored {
            self.durations.log_survival(state, duration)
        } else {
            self.durations.log_pmf(state, duration)
        }
    }
}

/// Best segmentation with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub segmentation: Segmentation,
    pub log_prob: f64,
    /// Contribution of each segment (entry, duration and emission terms);
    /// these sum to `log_prob` up to rounding.
    pub segment_scores: Vec<f64>,
}

impl DecodeResult {
    pub fn labels(&self) -> Vec<usize> {
        self.segmentation.decode()
    }
}
