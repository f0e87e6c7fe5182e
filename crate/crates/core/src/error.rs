use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite state at t = {time}")]
    BlowUp { time: f64 },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative concentration `{name}` = {value}")]
    NegativeConcentration { name: &'static str, value: f64 },

    #[error("window [{start}, {stop}] outside trajectory range [{t0}, {t_final}]")]
    WindowOutOfRange {
        start: f64,
        stop: f64,
        t0: f64,
        t_final: f64,
    },

    #[error("empty averaging window")]
    EmptyWindow,

    #[error("threshold {threshold} outside observed range [{min}, {max}]")]
    ThresholdOutOfRange { threshold: f64, min: f64, max: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("need at least 3 threshold crossings, got {0}")]
    TooFewCrossings(usize),

    #[error("trajectory of duration {duration} too short to classify (need {needed})")]
    Undetermined { duration: f64, needed: f64 },

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("no bracket found: {0}")]
    NoBracket(String),

    #[error("sweep point {input} failed: {source}")]
    SweepPoint {
        input: f64,
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
