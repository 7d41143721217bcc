use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::distributions::FitFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Pipeline stage a failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingestion,
    Transformer,
    Cable,
    Ied,
    CommNetwork,
    Pmu,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Ingestion => "ingestion",
            Stage::Transformer => "transformer",
            Stage::Cable => "cable",
            Stage::Ied => "ied",
            Stage::CommNetwork => "comm-network",
            Stage::Pmu => "pmu",
            Stage::Output => "output",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("random search exhausted after {} iterations: {}", .0.iterations, .0)]
    FitBudgetExhausted(Box<FitFailure>),

    #[error("history does not cover t = {instant} (sample {sample})")]
    HistoryCoverage { sample: usize, instant: f64 },

    #[error(
        "no filter parameters for reporting rate {reporting_rate} fps at {nominal_freq} Hz; supported pairs: {supported}"
    )]
    UnsupportedFilter {
        reporting_rate: f64,
        nominal_freq: f64,
        supported: String,
    },

    #[error("estimation window [{start}, {end}] exceeds available samples 0..{available}")]
    WindowOutOfRange { start: i64, end: i64, available: usize },

    #[error("{path}: row {row}: {message}")]
    Series { path: String, row: usize, message: String },

    #[error("{path}: {message}")]
    Ingest { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{stage} stage, sample {index}: {source}")]
    AtSample {
        stage: Stage,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage} stage: {source}")]
    InStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            e @ (Error::AtSample { .. } | Error::InStage { .. }) => e,
            e => Error::InStage {
                stage,
                source: Box::new(e),
            },
        }
    }

    pub fn at_sample(self, stage: Stage, index: usize) -> Self {
        Error::AtSample {
            stage,
            index,
            source: Box::new(self),
        }
    }

    /// Stage attribution, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::AtSample { stage, .. } | Error::InStage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// Innermost error with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSample { source, .. } | Error::InStage { source, .. } => source.root(),
            e => e,
        }
    }
}
