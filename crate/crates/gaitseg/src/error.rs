//! Crate-wide error type. Every fallible operation returns [`Result`].

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while validating, segmenting, or filtering
/// a recording. Variants carry enough context to point at the offending
/// input (file position, channel label, counts) without a debugger.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series too short: need more than {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("smoothing window of {window} samples does not fit series of length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("cutoff {cutoff_hz} Hz outside the open interval (0, {nyquist_hz}) Hz")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },

    #[error("expected {expected} walking bouts, found {found}")]
    ActivityCountMismatch { found: usize, expected: usize },

    #[error("expected 2 turning points, found {found}")]
    TurnCountMismatch { found: usize },

    #[error(
        "segment [{start}, {end}) of {len} samples too short for a safety margin of {margin} samples per side"
    )]
    SegmentTooShort { start: usize, end: usize, len: usize, margin: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("channel '{label}' contains a non-finite sample at index {index}")]
    NonFiniteSample { label: String, index: usize },

    #[error("sample rate must be finite and positive, got {0}")]
    InvalidSampleRate(f64),

    #[error("{path}:{line}:{column}: {reason}")]
    Parse { path: String, line: usize, column: usize, reason: String },

    #[error("{path}: header mismatch: expected '{expected}', found '{found}'{note}")]
    HeaderMismatch { path: String, expected: String, found: String, note: String },

    #[error(
        "kinematic and EMG recordings disagree in duration: {kin_s:.3} s vs {emg_s:.3} s (limit {limit_s} s)"
    )]
    DurationMismatch { kin_s: f64, emg_s: f64, limit_s: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Internal invariant violations; seeing one of these is a bug.
    #[error("internal error: {0}")]
    Internal(String),

    /// A module error annotated with the pipeline stage that raised it.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage { stage, source: Box::new(source) }
    }

    /// The innermost error, with any stage annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code class: 1 for configuration/usage problems, 2 for
    /// problems with the input data or environment, 3 for internal bugs.
    pub fn exit_code(&self) -> u8 {
        match self.root() {
            Error::Config(_) | Error::InvalidParams(_) => 1,
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}
