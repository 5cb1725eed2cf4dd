//! Seeded generator of labelled multimodal multiview sequences.
//!
//! A *world* fixes, from `world_seed`, one binary prototype vector per
//! (pose, channel) and the pseudo-poses visited by every rotation. Each
//! channel has a random base pattern; a pose shows either the base or its
//! complement, chosen by a per-pose codeword over channels. Codewords are far
//! apart in Hamming distance, so distinct poses are complementary on several
//! channels.
//!
//! Sampling draws the pose schedule from the initial distribution and a
//! uniform off-diagonal pose chain, durations from the truncated discretized
//! Gaussians, and per tick and channel Bernoulli features from the scene-
//! adjusted prototype, then applies symmetric bit-flip noise and channel
//! dropout. Dark/occluded scenes shrink prototype contrast towards 0.5 by
//! [`DO_CONTRAST`].
//!
//! The generator is ChaCha8 seeded with the 64-bit `seed`; the pose schedule
//! and the observations use separate ChaCha streams of that seed, so two
//! configurations differing only in noise share their schedule.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::emission::{ChannelEmissionModel, ChannelId, EmissionModel, FeatureFrame, FeatureStream};
use crate::error::{Error, Result};
use crate::inference::{HsmmModel, TransitionMatrix};
use crate::model::{DurationModel, InitialDistribution, PoseLabel, SceneCondition, Segment, Segmentation, StateSpace};

/// Contrast multiplier applied to prototypes in dark/occluded scenes.
pub const DO_CONTRAST: f64 = 0.5;
/// Ticks a transition clip holds the initial and final pose.
pub const CLIP_HOLD: usize = 3;
/// Ticks each intermediate pseudo-pose is held.
pub const CLIP_PLATEAU: usize = 3;
/// Intermediate pseudo-poses per rotation; with both endpoints the chain has
/// four pseudo-poses.
pub const CLIP_INTERMEDIATES: usize = 2;

/// Rotation direction of a pose transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Left, Direction::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn mirrored(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Direction::Left),
            "right" | "r" => Ok(Direction::Right),
            _ => Err(Error::InvalidParameter(format!("unknown direction `{s}`"))),
        }
    }
}

/// Everything needed to sample a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub poses: Vec<PoseLabel>,
    pub scene_doubling: bool,
    /// Feature dimension per channel.
    pub dim: usize,
    pub channels: Vec<ChannelId>,
    /// Bit-flip probability, indexed `[BC, DO]`.
    pub noise: [f64; 2],
    /// Per-channel unavailability probability, indexed `[BC, DO]`.
    pub dropout: [f64; 2],
    /// Per-pose `(mean, std)` duration in ticks.
    pub durations: Vec<(f64, f64)>,
    /// Longest sampled duration.
    pub d_max: usize,
    pub t_target: usize,
    pub initial_scene: SceneCondition,
    /// Switch scene once, at a segment boundary in the middle of the sequence.
    pub scene_switch: bool,
    pub seed: u64,
    pub world_seed: u64,
}

/// Shared world of the built-in presets.
pub const PRESET_WORLD_SEED: u64 = 0x0005_eed0_f1c0;

impl ScenarioConfig {
    /// Built-in presets: `bc-sim` (bright, noise 0.05, no dropout) and
    /// `do-sim` (dark, noise 0.15, dropout 0.3). Both use the ten rotation
    /// poses, scene-doubled states, all nine channels with one binary feature
    /// each, mean durations of 18 to 45 ticks and the same world.
    pub fn preset(name: &str) -> Option<ScenarioConfig> {
        let scene = match name {
            "bc-sim" => SceneCondition::Bc,
            "do-sim" => SceneCondition::Do,
            _ => return None,
        };
        let durations = (0..PoseLabel::ROTATION.len()).map(|k| (18.0 + 3.0 * k as f64, 4.0)).collect();
        Some(ScenarioConfig {
            poses: PoseLabel::ROTATION.to_vec(),
            scene_doubling: true,
            dim: 1,
            channels: ChannelId::all(),
            noise: [0.05, 0.15],
            dropout: [0.0, 0.3],
            durations,
            d_max: 60,
            t_target: 300,
            initial_scene: scene,
            scene_switch: false,
            seed: 0,
            world_seed: PRESET_WORLD_SEED,
        })
    }

    pub const PRESET_NAMES: [&'static str; 2] = ["bc-sim", "do-sim"];

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.poses.is_empty() {
            return bad("no poses".into());
        }
        if self.poses.iter().enumerate().any(|(i, p)| self.poses[..i].contains(p)) {
            return bad("duplicate pose".into());
        }
        if self.channels.is_empty() || self.dim == 0 {
            return bad("need at least one channel and one feature".into());
        }
        if self.channels.iter().enumerate().any(|(i, c)| self.channels[..i].contains(c)) {
            return bad("duplicate channel".into());
        }
        if self.durations.len() != self.poses.len() {
            return bad(format!("{} duration entries for {} poses", self.durations.len(), self.poses.len()));
        }
        if self.durations.iter().any(|&(m, s)| !(m.is_finite() && s > 0.0 && s.is_finite())) {
            return bad("durations need a finite mean and a positive std".into());
        }
        if self.noise.iter().chain(&self.dropout).any(|p| !(0.0..=1.0).contains(p)) {
            return bad("noise and dropout must be probabilities".into());
        }
        if self.t_target == 0 || self.d_max == 0 {
            return bad("t_target and d_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::new(&self.poses, self.scene_doubling)
    }

    fn scene_index(scene: SceneCondition) -> usize {
        match scene {
            SceneCondition::Bc => 0,
            SceneCondition::Do => 1,
        }
    }

    pub fn noise_for(&self, scene: SceneCondition) -> f64 {
        self.noise[Self::scene_index(scene)]
    }

    pub fn dropout_for(&self, scene: SceneCondition) -> f64 {
        self.dropout[Self::scene_index(scene)]
    }
}

/// Planted labels of a sampled sequence.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub states: StateSpace,
    pub segmentation: Segmentation,
    /// Scene of every tick.
    pub scene_track: Vec<SceneCondition>,
    pub generating_model: HsmmModel,
}

impl GroundTruth {
    pub fn labels(&self) -> Vec<usize> {
        self.segmentation.decode()
    }

    /// Pose of every tick.
    pub fn poses(&self) -> Vec<PoseLabel> {
        self.labels().into_iter().map(|s| self.states.get(s).expect("state in space").pose).collect()
    }
}

/// Deterministic prototypes for one world.
#[derive(Debug, Clone)]
pub struct World {
    seed: u64,
    channels: Vec<ChannelId>,
    dim: usize,
    /// `[pose ordinal][channel] -> binary vector`
    prototypes: Vec<Vec<Vec<f64>>>,
}

impl World {
    pub fn new(seed: u64, channels: &[ChannelId], dim: usize) -> World {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_poses = PoseLabel::ALL.len();
        let codes = codewords(&mut rng, n_poses, channels.len());
        let bases: Vec<Vec<f64>> =
            channels.iter().map(|_| (0..dim).map(|_| f64::from(rng.gen_bool(0.5) as u8)).collect()).collect();
        let prototypes = (0..n_poses)
            .map(|p| {
                (0..channels.len())
                    .map(|c| bases[c].iter().map(|&b| if codes[p][c] { 1.0 - b } else { b }).collect())
                    .collect()
            })
            .collect();
        World { seed, channels: channels.to_vec(), dim, prototypes }
    }

    pub fn for_config(config: &ScenarioConfig) -> World {
        World::new(config.world_seed, &config.channels, config.dim)
    }

    pub fn prototype(&self, pose: PoseLabel, channel: usize) -> &[f64] {
        &self.prototypes[pose.ordinal()][channel]
    }

    /// Binary prototypes of the intermediate pseudo-poses of a rotation, in
    /// visiting order. Each one differs from both endpoints by at least half
    /// the feature range on some channel and from its predecessor somewhere,
    /// so it is visible as motion.
    pub fn pseudo_poses(&self, from: PoseLabel, to: PoseLabel, direction: Direction) -> Vec<Vec<Vec<f64>>> {
        let mut h = DefaultHasher::new();
        (self.seed, from.ordinal(), to.ordinal(), direction).hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
        let (a, b) = (&self.prototypes[from.ordinal()], &self.prototypes[to.ordinal()]);
        let dist = |x: &[f64], y: &[f64]| {
            (x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / x.len() as f64).sqrt()
        };
        let mut out: Vec<Vec<Vec<f64>>> = Vec::with_capacity(CLIP_INTERMEDIATES);
        for _ in 0..CLIP_INTERMEDIATES {
            let mut attempts = 0;
            loop {
                let cand: Vec<Vec<f64>> = self
                    .channels
                    .iter()
                    .map(|_| (0..self.dim).map(|_| f64::from(rng.gen_bool(0.5) as u8)).collect())
                    .collect();
                attempts += 1;
                let salient = (0..cand.len()).any(|c| dist(&cand[c], &a[c]).min(dist(&cand[c], &b[c])) >= 0.5);
                let moved = out.last().is_none_or(|prev| *prev != cand);
                if (salient && moved) || attempts >= 1000 {
                    out.push(cand);
                    break;
                }
            }
        }
        out
    }

    /// Bernoulli means of every channel for a pose shown in `scene`, before noise.
    pub fn scene_means(&self, prototype: &[Vec<f64>], scene: SceneCondition) -> Vec<Vec<f64>> {
        prototype.iter().map(|v| v.iter().map(|&m| scene_adjust(m, scene)).collect()).collect()
    }

    pub fn pose_prototype(&self, pose: PoseLabel) -> Vec<Vec<f64>> {
        self.prototypes[pose.ordinal()].clone()
    }
}

fn scene_adjust(mean: f64, scene: SceneCondition) -> f64 {
    match scene {
        SceneCondition::Bc => mean,
        SceneCondition::Do => 0.5 + DO_CONTRAST * (mean - 0.5),
    }
}

/// Effective Bernoulli mean after symmetric bit flips with probability `noise`.
fn noisy_mean(mean: f64, noise: f64) -> f64 {
    mean * (1.0 - noise) + (1.0 - mean) * noise
}

/// Greedy random codewords of length `len` with pairwise Hamming distance at
/// least 3 where the space allows it.
fn codewords(rng: &mut ChaCha8Rng, count: usize, len: usize) -> Vec<Vec<bool>> {
    let target = len.min(3);
    let mut words: Vec<Vec<bool>> = Vec::with_capacity(count);
    let mut attempts = 0;
    while words.len() < count {
        let cand: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
        let min_dist = words.iter().map(|w| w.iter().zip(&cand).filter(|(a, b)| a != b).count()).min().unwrap_or(len);
        attempts += 1;
        // relax the distance target when the space is too small for it
        if min_dist >= target.saturating_sub(attempts / 2000) {
            words.push(cand);
            attempts = 0;
        }
    }
    words
}

fn categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

fn scenario_rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut schedule = ChaCha8Rng::seed_from_u64(seed);
    schedule.set_stream(0);
    let mut observe = ChaCha8Rng::seed_from_u64(seed);
    observe.set_stream(1);
    (schedule, observe)
}

fn observe_tick(rng: &mut ChaCha8Rng, tick: usize, means: &[Vec<f64>], noise: f64, dropout: f64) -> FeatureFrame {
    let mut values = Vec::with_capacity(means.len());
    let mut available = Vec::with_capacity(means.len());
    for channel_means in means {
        let v: Vec<f64> = channel_means
            .iter()
            .map(|&m| {
                // explicit uniforms keep RNG consumption independent of the means
                let bit = rng.gen::<f64>() < m;
                let flip = rng.gen::<f64>() < noise;
                f64::from((bit ^ flip) as u8)
            })
            .collect();
        let dropped = rng.gen::<f64>() < dropout;
        values.push(if dropped { vec![0.0; v.len()] } else { v });
        available.push(!dropped);
    }
    FeatureFrame { tick, values, available }
}

/// The HSMM that generated a scenario's observations, over its state space.
pub fn generating_model(config: &ScenarioConfig) -> Result<HsmmModel> {
    config.validate()?;
    let world = World::for_config(config);
    let states = config.state_space();
    let q = states.len();
    let initial = InitialDistribution::from_prior_table(&StateSpace::from_pairs(
        states.iter().map(|s| (s.pose, s.scene.or(Some(config.initial_scene)))),
    ))?;
    let n = config.poses.len();
    let rows = states
        .iter()
        .map(|from| {
            let mut row: Vec<f64> =
                states
                    .iter()
                    .map(|to| {
                        if to.scene == from.scene && to.pose != from.pose && n > 1 {
                            1.0 / (n - 1) as f64
                        } else {
                            0.0
                        }
                    })
                    .collect();
            crate::model::normalize(&mut row);
            row
        })
        .collect();
    let transitions = TransitionMatrix::new_segmental(rows)?;
    let pose_index = |p: PoseLabel| config.poses.iter().position(|&x| x == p).expect("pose in config");
    let durations = DurationModel::gaussian(
        &states.iter().map(|s| config.durations[pose_index(s.pose)]).collect::<Vec<_>>(),
        config.d_max,
    )?;
    let emissions = EmissionModel::new(
        config
            .channels
            .iter()
            .enumerate()
            .map(|(c, &channel)| {
                let rows = states
                    .iter()
                    .map(|s| {
                        let scene = s.scene.unwrap_or(config.initial_scene);
                        world
                            .prototype(s.pose, c)
                            .iter()
                            .map(|&m| noisy_mean(scene_adjust(m, scene), config.noise_for(scene)))
                            .collect()
                    })
                    .collect();
                ChannelEmissionModel::new(channel, rows)
            })
            .collect::<Result<Vec<_>>>()?,
        false,
    )?;
    debug_assert_eq!(emissions.num_states(), q);
    HsmmModel::new(states, initial, transitions, durations, emissions)
}

/// Samples a labelled sequence of `config.t_target` ticks.
pub fn sample_sequence(config: &ScenarioConfig) -> Result<(FeatureStream, GroundTruth)> {
    config.validate()?;
    let world = World::for_config(config);
    let model = generating_model(config)?;
    let (mut rng, mut obs_rng) = scenario_rngs(config.seed);

    // pose schedule
    let n = config.poses.len();
    let pose_durations = DurationModel::gaussian(&config.durations, config.d_max)?;
    let pose_prior: Vec<f64> = {
        let scene_states = StateSpace::from_pairs(config.poses.iter().map(|&p| (p, Some(config.initial_scene))));
        InitialDistribution::from_prior_table(&scene_states)?.probs().to_vec()
    };
    let mut schedule: Vec<(usize, usize)> = Vec::new();
    let mut covered = 0;
    while covered < config.t_target {
        let pose = match schedule.last() {
            None => categorical(&mut rng, &pose_prior),
            Some(&(prev, _)) if n > 1 => {
                let k = rng.gen_range(0..n - 1);
                if k >= prev {
                    k + 1
                } else {
                    k
                }
            }
            Some(&(prev, _)) => prev,
        };
        let pmf: Vec<f64> = (1..=config.d_max).map(|d| pose_durations.pmf(pose, d).expect("in range")).collect();
        let d = (categorical(&mut rng, &pmf) + 1).min(config.t_target - covered);
        if n == 1 && !schedule.is_empty() {
            schedule.last_mut().expect("non-empty").1 += d;
        } else {
            schedule.push((pose, d));
        }
        covered += d;
    }

    // scene per segment
    let mut scenes = vec![config.initial_scene; schedule.len()];
    if config.scene_switch && schedule.len() >= 2 {
        let u = rng.gen_range(1..schedule.len());
        scenes[u..].iter_mut().for_each(|s| *s = config.initial_scene.other());
    }

    let states = config.state_space();
    let mut segments = Vec::with_capacity(schedule.len());
    let mut start = 1;
    for (&(pose, d), &scene) in schedule.iter().zip(&scenes) {
        let label_scene = config.scene_doubling.then_some(scene);
        let state = states.index_of(config.poses[pose], label_scene).expect("state exists");
        segments.push(Segment { start, duration: d, state });
        start += d;
    }
    let segmentation = Segmentation::new(segments, config.t_target)?;

    let mut frames = Vec::with_capacity(config.t_target);
    let mut scene_track = Vec::with_capacity(config.t_target);
    for ((&(pose, d), &scene), seg) in schedule.iter().zip(&scenes).zip(segmentation.segments()) {
        let means = world.scene_means(&world.pose_prototype(config.poses[pose]), scene);
        for t in seg.start..seg.start + d {
            frames.push(observe_tick(&mut obs_rng, t, &means, config.noise_for(scene), config.dropout_for(scene)));
            scene_track.push(scene);
        }
    }
    let stream = FeatureStream::new(config.channels.clone(), config.dim, frames)?;
    Ok((stream, GroundTruth { states, segmentation, scene_track, generating_model: model }))
}

/// Planted structure of a transition clip.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTruth {
    pub from: PoseLabel,
    pub to: PoseLabel,
    pub direction: Direction,
    pub scene: SceneCondition,
    /// Pseudo-pose chain as segments over chain positions, endpoints included.
    pub segmentation: Segmentation,
    /// Central tick of every intermediate pseudo-pose.
    pub planted_ticks: Vec<usize>,
}

/// Samples one rotation: hold `from`, visit the direction-specific
/// intermediate pseudo-poses, hold `to`. Noise and dropout come from the
/// config's initial scene.
pub fn sample_transition_clip(
    from: PoseLabel,
    to: PoseLabel,
    direction: Direction,
    config: &ScenarioConfig,
) -> Result<(FeatureStream, TransitionTruth)> {
    config.validate()?;
    let world = World::for_config(config);
    let scene = config.initial_scene;
    let (_, mut rng) = scenario_rngs(config.seed);

    let mut chain = vec![world.pose_prototype(from)];
    chain.extend(world.pseudo_poses(from, to, direction));
    chain.push(world.pose_prototype(to));

    let mut segments = Vec::with_capacity(chain.len());
    let mut planted_ticks = Vec::new();
    let mut frames = Vec::new();
    let mut start = 1;
    for (k, proto) in chain.iter().enumerate() {
        let d = if k == 0 || k + 1 == chain.len() { CLIP_HOLD } else { CLIP_PLATEAU };
        if k > 0 && k + 1 < chain.len() {
            planted_ticks.push(start + d / 2);
        }
        let means = world.scene_means(proto, scene);
        for t in start..start + d {
            frames.push(observe_tick(&mut rng, t, &means, config.noise_for(scene), config.dropout_for(scene)));
        }
        segments.push(Segment { start, duration: d, state: k });
        start += d;
    }
    let len = start - 1;
    let stream = FeatureStream::new(config.channels.clone(), config.dim, frames)?;
    let truth =
        TransitionTruth { from, to, direction, scene, segmentation: Segmentation::new(segments, len)?, planted_ticks };
    Ok((stream, truth))
}

/// Every (from, to, direction) over the rotation poses, `from == to`
/// included: 10 x 10 x 2 = 200 combinations.
pub fn transition_combinations() -> Vec<(PoseLabel, PoseLabel, Direction)> {
    let mut out = Vec::with_capacity(200);
    for from in PoseLabel::ROTATION {
        for to in PoseLabel::ROTATION {
            for dir in Direction::ALL {
                out.push((from, to, dir));
            }
        }
    }
    out
}
