use std::io;

use crate::units::UnitId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variant names double as the stable error identifiers printed by the CLI
/// and mirrored by the FFI status codes, see [`Error::kind`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("duration at index {index} is negative")]
    NegativeDuration { index: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("duration at index {index} is not positive ({value})")]
    NonPositiveDuration { index: usize, value: f64 },

    #[error("target length must be at least 1")]
    NonPositiveTarget,

    #[error("need to adjust {needed} durations but only {available} exist")]
    InfeasibleAdjustment { needed: usize, available: usize },

    #[error("adjacent units at index {index} are equal ({unit})")]
    AdjacentDuplicate { index: usize, unit: UnitId },

    #[error("unit id {unit} is outside the vocabulary of size {vocab}")]
    UnitOutOfRange { unit: UnitId, vocab: u32 },

    #[error("{n} points cannot be split into {k} clusters")]
    TooFewPoints { n: usize, k: usize },

    #[error("input contains a non-finite value")]
    NonFiniteInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("loss weights must be non-negative and sum to less than 1 (sync={sync}, gen={gen})")]
    InvalidWeights { sync: f64, gen: f64 },

    #[error("log-probability at step {index} is positive ({value})")]
    PositiveLogProb { index: usize, value: f64 },

    #[error("length at index {index} must be at least 1")]
    InvalidLength { index: usize },

    #[error("timeline needs 20 ms frames, got {0} ms")]
    WrongFrameRate(u32),

    #[error("{n_video} video frames cannot map one-to-one onto {n_ref} reference frames")]
    NotIsometric { n_video: usize, n_ref: usize },

    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("bad file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable identifier of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::NegativeDuration { .. } => "NegativeDuration",
            Error::EmptyInput => "EmptyInput",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::NonPositiveDuration { .. } => "NonPositiveDuration",
            Error::NonPositiveTarget => "NonPositiveTarget",
            Error::InfeasibleAdjustment { .. } => "InfeasibleAdjustment",
            Error::AdjacentDuplicate { .. } => "AdjacentDuplicate",
            Error::UnitOutOfRange { .. } => "UnitOutOfRange",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::NonFiniteInput => "NonFiniteInput",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InvalidWeights { .. } => "InvalidWeights",
            Error::PositiveLogProb { .. } => "PositiveLogProb",
            Error::InvalidLength { .. } => "InvalidLength",
            Error::WrongFrameRate(_) => "WrongFrameRate",
            Error::NotIsometric { .. } => "NotIsometric",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::AtLine { source, .. } => source.kind(),
            Error::Parse(_) => "Parse",
            Error::Format(_) => "Format",
            Error::Io(_) => "Io",
        }
    }

    /// The innermost error, with line context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io(_))
    }

    pub(crate) fn at_line(self, line: usize) -> Error {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }
}
