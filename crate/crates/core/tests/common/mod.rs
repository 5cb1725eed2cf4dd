#![allow(dead_code)]

use posehsmm::{
    ChannelEmissionModel, ChannelId, DurationModel, EmissionModel, FeatureFrame, FeatureStream, HsmmModel,
    InitialDistribution, StateSpace, TransitionMatrix,
};
use rand::Rng;

/// Positive weights normalized to a probability vector.
pub fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

pub fn channels(n: usize) -> Vec<ChannelId> {
    ChannelId::all()[..n].to_vec()
}

pub fn random_segmental<R: Rng>(rng: &mut R, q: usize) -> TransitionMatrix {
    if q == 1 {
        return TransitionMatrix::new_segmental(vec![vec![0.0]]).unwrap();
    }
    let rows = (0..q)
        .map(|i| {
            let off = simplex(rng, q - 1);
            let mut row = Vec::with_capacity(q);
            row.extend_from_slice(&off[..i]);
            row.push(0.0);
            row.extend_from_slice(&off[i..]);
            row
        })
        .collect();
    TransitionMatrix::new_segmental(rows).unwrap()
}

pub fn random_emissions<R: Rng>(rng: &mut R, q: usize, dim: usize, n_channels: usize) -> EmissionModel {
    let models = channels(n_channels)
        .into_iter()
        .map(|c| {
            let means = (0..q).map(|_| (0..dim).map(|_| rng.gen_range(0.05..0.95)).collect()).collect();
            ChannelEmissionModel::new(c, means).unwrap()
        })
        .collect();
    EmissionModel::new(models, false).unwrap()
}

pub fn random_hsmm<R: Rng>(rng: &mut R, q: usize, d_max: usize, dim: usize, n_channels: usize) -> HsmmModel {
    let durations: Vec<(f64, f64)> =
        (0..q).map(|_| (rng.gen_range(0.5..d_max as f64 + 0.5), rng.gen_range(0.3..2.0))).collect();
    HsmmModel::new(
        StateSpace::generic(q),
        InitialDistribution::new(simplex(rng, q)).unwrap(),
        random_segmental(rng, q),
        DurationModel::gaussian(&durations, d_max).unwrap(),
        random_emissions(rng, q, dim, n_channels),
    )
    .unwrap()
}

/// Binary features (occasionally fractional) with each channel observed
/// with probability `p_avail`.
pub fn random_stream<R: Rng>(rng: &mut R, t: usize, dim: usize, n_channels: usize, p_avail: f64) -> FeatureStream {
    let frames = (1..=t)
        .map(|tick| {
            let values = (0..n_channels)
                .map(|_| {
                    (0..dim)
                        .map(|_| {
                            if rng.gen_bool(0.1) {
                                rng.gen_range(0.0..=1.0)
                            } else {
                                f64::from(rng.gen_bool(0.5) as u8)
                            }
                        })
                        .collect()
                })
                .collect();
            let available = (0..n_channels).map(|_| rng.gen_bool(p_avail)).collect();
            FeatureFrame { tick, values, available }
        })
        .collect();
    FeatureStream::new(channels(n_channels), dim, frames).unwrap()
}

/// Calls `f` with every labelling of length `t` over `q` states.
pub fn for_each_labelling(q: usize, t: usize, mut f: impl FnMut(&[usize])) {
    let mut labels = vec![0usize; t];
    loop {
        f(&labels);
        let mut pos = t;
        loop {
            if pos == 0 {
                return;
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
