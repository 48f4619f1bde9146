use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rigid fit needs at least 3 common labels, found {found}")]
    FewerThanThreeCommonLabels { found: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("degenerate axis for {0}")]
    DegenerateAxis(String),

    #[error("marker {0} is never visible")]
    MarkerNeverVisible(String),

    #[error("tracking failed for {cluster}: {source}")]
    TrackingFailed {
        cluster: String,
        #[source]
        source: Box<Error>,
    },

    #[error("duplicate label {0}")]
    DuplicateLabel(String),

    #[error("unknown label {0}")]
    UnknownLabel(String),

    #[error("anthropometric table is missing {0}")]
    MissingSegment(String),

    #[error("mass fraction out of range: {0}")]
    MassFractionOutOfRange(String),

    #[error("malformed document: {0}")]
    MalformedDocument(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("calibration step {step} failed: {source}")]
    Calibration {
        step: u8,
        #[source]
        source: Box<Error>,
    },

    #[error("no samples inside window [{t0}, {t1}]")]
    EmptyWindow { t0: f64, t1: f64 },

    #[error("force record is empty")]
    EmptyRecord,

    #[error("total vertical load {total} N is below the {epsilon} N threshold")]
    NegligibleLoad { total: f64, epsilon: f64 },

    #[error("all {count} force samples in the window carry negligible load")]
    AllSamplesNegligible { count: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("need at least 2 results, got {0}")]
    TooFewResults(usize),

    #[error("centre of mass ({ap}, {ml}) lies outside the wheel contact polygon")]
    InfeasibleCoM { ap: f64, ml: f64 },

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("{}:{line}:{column}: {message}", file.display())]
    SchemaViolation {
        file: PathBuf,
        line: u64,
        column: u64,
        message: String,
    },

    #[error("{}: expected unit {expected}, found {found}", file.display())]
    UnitMismatch {
        file: PathBuf,
        expected: String,
        found: String,
    },

    #[error("trial {posture} #{trial}: {source}")]
    Trial {
        posture: String,
        trial: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Process exit status classes for the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Io = 1,
    Schema = 2,
    Calibration = 3,
    Tracking = 4,
    Statistics = 5,
}

impl Error {
    pub fn tracking(cluster: impl Into<String>, source: Error) -> Self {
        Error::TrackingFailed {
            cluster: cluster.into(),
            source: Box::new(source),
        }
    }

    pub fn at_step(step: u8, source: Error) -> Self {
        match source {
            // keep the innermost step annotation
            e @ Error::Calibration { .. } => e,
            e => Error::Calibration {
                step,
                source: Box::new(e),
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::Io { .. } => ExitClass::Io,
            Error::FileNotFound(_)
            | Error::SchemaViolation { .. }
            | Error::UnitMismatch { .. }
            | Error::MalformedDocument(_)
            | Error::MissingInput(_)
            | Error::MissingSegment(_)
            | Error::MassFractionOutOfRange(_)
            | Error::UnknownLabel(_)
            | Error::DuplicateLabel(_) => ExitClass::Schema,
            Error::Calibration { .. } => ExitClass::Calibration,
            Error::EmptyInput | Error::TooFewResults(_) => ExitClass::Statistics,
            Error::Trial { source, .. } => source.exit_class(),
            _ => ExitClass::Tracking,
        }
    }
}
