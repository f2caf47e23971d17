use thiserror::Error;

/// Errors raised by the ordinal-pattern symmetry test library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("window length {0} is too short (need d >= 2)")]
    WindowTooShort(usize),
    #[error("window length {d} exceeds the configured cap of {cap}")]
    WindowTooLong { d: usize, cap: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("series of length {len} is too short for window length {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("invalid ordinal pattern: {0}")]
    InvalidPattern(String),
    #[error("pattern id {id} out of range for d = {d} (d! = {max})")]
    IdOutOfRange { id: u32, d: usize, max: u32 },
    #[error("pattern {0} appears more than once in the partition")]
    DuplicatePattern(String),
    #[error("groups do not cover all patterns: {missing} of {total} patterns unassigned")]
    NotAPartition { missing: usize, total: usize },
    #[error("bad pattern literal on line {line}: {text}")]
    BadPatternLiteral { line: usize, text: String },
    #[error("need at least two windows, got {0}")]
    TooFewWindows(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a probability vector: {0}")]
    NotAProbabilityVector(String),
    #[error(
        "group {group} has {size} members but was never observed; \
         increase the series length or merge groups"
    )]
    ZeroGroupProbability { group: usize, size: usize },
    #[error("unknown kernel '{0}' (expected bartlett, parzen or qs)")]
    UnknownKernel(String),
    #[error("bandwidth {0} is below 1")]
    BandwidthTooSmall(f64),
    #[error("partition has no multi-member group; the null law is degenerate")]
    DegenerateModel,
    #[error("covariance is not positive semi-definite (min eigenvalue {0})")]
    NotPsd(f64),
    #[error("empty Monte Carlo sample")]
    EmptySample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("AR(1) coefficient {0} violates |theta| < 1")]
    UnstableAr(f64),
    #[error("unknown marginal '{0}'")]
    UnknownMarginal(String),
    #[error("invalid process spec: {0}")]
    InvalidSpec(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// The innermost error, with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
