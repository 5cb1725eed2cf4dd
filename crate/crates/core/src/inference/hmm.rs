use crate::emission::{EmissionModel, EmissionTable, FeatureStream};
use crate::error::{Error, Result};
use crate::model::InitialDistribution;

use super::TransitionMatrix;

/// Frame-level HMM: geometric dwell times through the self-transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    pub initial: InitialDistribution,
    pub transitions: TransitionMatrix,
    pub emissions: EmissionModel,
}

impl HmmModel {
    pub fn new(initial: InitialDistribution, transitions: TransitionMatrix, emissions: EmissionModel) -> Result<Self> {
        let q = initial.len();
        if transitions.num_states() != q || emissions.num_states() != q {
            return Err(Error::DimensionMismatch(format!(
                "HMM components disagree on the number of states ({q}, {}, {})",
                transitions.num_states(),
                emissions.num_states()
            )));
        }
        Ok(HmmModel { initial, transitions, emissions })
    }

    pub fn num_states(&self) -> usize {
        self.initial.len()
    }
}

/// `log pi(y_1) + sum_t log P(x_t | y_t) + sum_{t >= 2} log a(y_{t-1}, y_t)`.
pub fn hmm_joint_log_prob(labels: &[usize], stream: &FeatureStream, model: &HmmModel) -> Result<f64> {
    if labels.len() != stream.len() {
        return Err(Error::LabelMismatch { labels: labels.len(), ticks: stream.len() });
    }
    let first = *labels.first().ok_or(Error::EmptySequence)?;
    let q = model.num_states();
    if let Some(&bad) = labels.iter().find(|&&y| y >= q) {
        return Err(Error::InvalidParameter(format!("label {bad} outside {q} states")));
    }
    let table = model.emissions.score_stream(stream)?;
    let mut total = model.initial.probs()[first].ln();
    for (t, &y) in labels.iter().enumerate() {
        total += table.get(t + 1, y);
    }
    for pair in labels.windows(2) {
        total += model.transitions.log_prob(pair[0], pair[1]);
    }
    Ok(total)
}

/// Most probable state per tick; ties go to the lowest state index.
pub fn hmm_viterbi(stream: &FeatureStream, model: &HmmModel) -> Result<(Vec<usize>, f64)> {
    if stream.is_empty() {
        return Err(Error::EmptySequence);
    }
    let table = model.emissions.score_stream(stream)?;
    viterbi_table(&table, model)
}

fn viterbi_table(table: &EmissionTable, model: &HmmModel) -> Result<(Vec<usize>, f64)> {
    let (big_t, q) = (table.ticks(), model.num_states());
    let mut score: Vec<f64> = (0..q).map(|j| model.initial.probs()[j].ln() + table.get(1, j)).collect();
    let mut back = vec![0usize; big_t * q];
    let mut next = vec![f64::NEG_INFINITY; q];
    for t in 2..=big_t {
        for j in 0..q {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (i, s) in score.iter().enumerate() {
                let cand = s + model.transitions.log_prob(i, j);
                if cand > best {
                    best = cand;
                    arg = i;
                }
            }
            next[j] = best + table.get(t, j);
            back[(t - 1) * q + j] = arg;
        }
        std::mem::swap(&mut score, &mut next);
    }
    let mut best = f64::NEG_INFINITY;
    let mut state = None;
    for (j, &s) in score.iter().enumerate() {
        if s > best {
            best = s;
            state = Some(j);
        }
    }
    let mut y = state.ok_or(Error::NoFeasiblePath)?;
    let mut path = vec![0; big_t];
    for t in (1..=big_t).rev() {
        path[t - 1] = y;
        if t > 1 {
            y = back[(t - 1) * q + y];
        }
    }
    Ok((path, best))
}
