use std::fmt;

use thiserror::Error;

/// Pipeline stage that produced an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Difference,
    Scale,
    Transform,
    Encode,
    Inpaint,
    Decode,
    Extract,
    Unscale,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Difference => "difference",
            Stage::Scale => "scale",
            Stage::Transform => "transform",
            Stage::Encode => "encode",
            Stage::Inpaint => "inpaint",
            Stage::Decode => "decode",
            Stage::Extract => "extract",
            Stage::Unscale => "unscale",
        };
        f.write_str(name)
    }
}

/// A malformed row in a CSV input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the source file.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("horizon exceeds series: horizon {horizon}, length {len}")]
    HorizonExceedsSeries { horizon: usize, len: usize },
    #[error("horizon must be positive")]
    ZeroHorizon,
    #[error("series too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("invalid bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("{what}: value {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("GC singularity at ({row}, {col})")]
    GcSingularity { row: usize, col: usize },
    #[error("insufficient context: no fully known {patch}x{patch} source patch")]
    InsufficientContext { patch: usize },
    #[error("invalid patch configuration: {0}")]
    InvalidPatch(String),
    #[error("no feasible model")]
    NoFeasibleModel,
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("schema violations:\n{}", format_rows(.0))]
    Schema(Vec<RowError>),
    #[error("incomplete comparison: {}", .0.join("; "))]
    MissingForecasts(Vec<String>),
    #[error("invalid PPM: {0}")]
    Ppm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_rows(rows: &[RowError]) -> String {
    rows.iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
