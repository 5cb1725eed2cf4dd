use thiserror::Error;

use crate::emission::ChannelId;
use crate::keyframes::KeyframeSet;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("malformed segmentation: {0}")]
    MalformedSegmentation(String),

    #[error("self-transition probability of 1 gives an unbounded stay")]
    DegenerateSelfLoop,

    #[error("duration {duration} outside [1, {d_max}]")]
    DurationOutOfRange { duration: usize, d_max: usize },

    #[error("channel {0} is not available")]
    ChannelAbsent(ChannelId),

    #[error("frame has no available channel")]
    NoObservation,

    #[error("no feasible path: every labelling has zero probability")]
    NoFeasiblePath,

    #[error("instance too large for exhaustive search ({states}^{ticks} labellings)")]
    InstanceTooLarge { states: usize, ticks: usize },

    /// The clip never moves enough on any channel; the endpoints are still
    /// reported so callers can log them.
    #[error("static clip: no channel exceeds the endpoint dissimilarity threshold")]
    StaticClip { endpoints: Box<KeyframeSet> },

    #[error("no transition detected in clip")]
    NoTransitionDetected,

    #[error("label sequence length {labels} does not match stream length {ticks}")]
    LabelMismatch { labels: usize, ticks: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("unsupported format version `{0}`")]
    UnsupportedVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
