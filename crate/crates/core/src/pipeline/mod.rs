//! Batch commands wiring the stages together: `ingest` (DICOM to cached
//! tensors plus a manifest), `run` (split, balance, extract, train,
//! evaluate), `compare` and `report`.

pub mod cache;
mod compare;
pub mod config;
mod ingest;
mod record;
mod run;
pub mod svg;

pub use compare::{cmd_compare, Comparison};
pub use config::{ClassifierKind, ExtractorKind, PipelineConfig, ProbSource};
pub use ingest::{cmd_ingest, read_labels, IngestSummary, SliceLabels};
pub use record::{cmd_report, load_record, RunRecord, SCHEMA_VERSION};
pub use run::cmd_run;

use thiserror::Error;

/// Broad failure class, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, kind: ErrorKind, message: String },
    #[error("records were evaluated on different test sets ({0} vs {1})")]
    MismatchedTestSets(String, String),
    #[error("compare needs at least 2 run records, got {0}")]
    TooFewRecords(usize),
}

impl PipelineError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            PipelineError::Config(_) | PipelineError::TooFewRecords(_) => ErrorKind::Config,
            PipelineError::Stage { kind, .. } => *kind,
            PipelineError::MismatchedTestSets(..) => ErrorKind::Data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Internal => 4,
        }
    }

    pub(crate) fn data(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage { stage, kind: ErrorKind::Data, message: e.to_string() }
    }

    pub(crate) fn internal(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage { stage, kind: ErrorKind::Internal, message: e.to_string() }
    }

    pub(crate) fn config(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage { stage, kind: ErrorKind::Config, message: e.to_string() }
    }
}
