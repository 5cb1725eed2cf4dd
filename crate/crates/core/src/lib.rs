//! Duration-explicit hidden semi-Markov models for multimodal multiview
//! sleep-pose sequences: segment Viterbi decoding, supervised training,
//! keyframe compression of pose transitions, pose-history summaries and a
//! seeded simulator.

pub mod emission;
pub mod error;
pub mod inference;
pub mod io;
pub mod keyframes;
pub mod model;
pub mod simulator;
pub mod summarizer;

pub use emission::{
    emission_log_likelihood, fit_channel_emissions, fit_emissions, ChannelEmissionModel, ChannelId, EmissionModel,
    EmissionTable, FeatureFrame, FeatureStream, Modality, View,
};
pub use error::{Error, Result};
pub use inference::{
    brute_force_decode, hmm_joint_log_prob, hmm_viterbi, hsmm_joint_log_prob, hsmm_viterbi, train_hsmm, DecodeResult,
    FinalSegment, HmmModel, HsmmModel, TrainOptions, TransitionMatrix,
};
pub use keyframes::{keyframes_to_pseudo_pose_stream, select_keyframes, Keyframe, KeyframeParams, KeyframeSet};
pub use model::{
    build_initial_distribution, decode_segments, encode_segments, gaussian_duration_pmf, geometric_duration_pmf,
    DurationDist, DurationModel, InitialDistribution, PoseLabel, SceneCondition, Segment, Segmentation, StateId,
    StateSpace,
};
pub use simulator::{sample_sequence, sample_transition_clip, Direction, GroundTruth, ScenarioConfig};
pub use summarizer::{
    build_transition_library, classify_transition, summarize_history, summarize_labels, HistoryParams, HistoryRecord,
    TransitionLibrary, TransitionRecord,
};
