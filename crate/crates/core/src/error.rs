use thiserror::Error;

/// Errors produced by the imputation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right} in {context}")]
    ShapeMismatch {
        left: String,
        right: String,
        context: &'static str,
    },

    #[error("insufficient audio: {0}")]
    InsufficientAudio(String),

    #[error("degenerate power: {0}")]
    DegeneratePower(String),

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("mask is not binary: found {0}")]
    NonBinaryMask(f64),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no utterance long enough (need at least {needed} frames)")]
    NoUtteranceLongEnough { needed: usize },

    #[error("fragment out of range: offset {offset} + {fragment_frames} frames exceeds {total_frames}")]
    FragmentOutOfRange {
        offset: usize,
        fragment_frames: usize,
        total_frames: usize,
    },

    #[error("no reliable rows: every weight is zero")]
    NoReliableRows,

    #[error("invalid solve problem: {0}")]
    InvalidProblem(String),

    #[error("empty lambda grid")]
    EmptyLambdaGrid,

    #[error("lambda grid must be strictly decreasing and positive")]
    BadLambdaGrid,

    #[error("window longer than signal: {window_rows} rows > {total_rows} rows")]
    WindowExceedsSignal {
        window_rows: usize,
        total_rows: usize,
    },

    #[error("window shift {shift_rows} exceeds window length {window_rows}; rows would be left uncovered")]
    ShiftTooLarge {
        shift_rows: usize,
        window_rows: usize,
    },

    #[error("invalid window plan: {0}")]
    InvalidPlan(String),

    #[error("dictionary mismatch: {0}")]
    DictionaryMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed WAV: {0}")]
    MalformedWav(String),

    #[error("malformed SPIM matrix: {0}")]
    MalformedSpim(String),

    #[error("malformed dictionary manifest: {0}")]
    MalformedManifest(String),

    #[error("sweep produced no usable utterances")]
    SweepAllFailed,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
