use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),
    #[error("invalid audio: {0}")]
    InvalidAudio(String),
    #[error("signal of {samples} samples is shorter than one frame of {frame_len} samples")]
    SignalTooShort { samples: usize, frame_len: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("feature file: {0}")]
    FeatureFormat(String),
    #[error("too few frames: {frames} frames for {components} components")]
    TooFewFrames { frames: usize, components: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("corpus cell ({speaker}, {keyword}) has no utterances")]
    MissingCell { speaker: String, keyword: String },
    #[error("corpus cell ({speaker}, {keyword}) has {count} utterance(s), need at least {needed}")]
    CellTooSmall {
        speaker: String,
        keyword: String,
        count: usize,
        needed: usize,
    },
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero-power signal")]
    ZeroPower,
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    RateMismatch(u32, u32),
    #[error("overlap constraint infeasible: {0}")]
    OverlapInfeasible(String),
    #[error("malformed ground truth: {0}")]
    MalformedTruth(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invariant check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
