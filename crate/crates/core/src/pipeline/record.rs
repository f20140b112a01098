use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classifiers::TrainingHistory;
use crate::metrics::{render_report, EvaluationReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Per-partition class counts, train before and after balancing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCounts {
    pub train_before_balance: Vec<usize>,
    pub train_after_balance: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Everything one `run` produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub run_name: String,
    /// Every config key with its value.
    pub config: BTreeMap<String, String>,
    pub classifier: String,
    pub extractor: String,
    pub class_names: Vec<String>,
    pub class_counts: PartitionCounts,
    /// SHA-256 over the sorted test sample references.
    pub test_fingerprint: String,
    /// Wall-clock milliseconds per stage.
    pub timings_ms: BTreeMap<String, f64>,
    /// Artifact name to path.
    pub artifacts: BTreeMap<String, String>,
    pub history: Option<TrainingHistory>,
    pub report: EvaluationReport,
}

pub fn load_record(path: &Path) -> Result<RunRecord, PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::data("report", format!("{}: {e}", path.display())))?;
    let record: RunRecord =
        serde_json::from_str(&text).map_err(|e| PipelineError::data("report", format!("{}: {e}", path.display())))?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(PipelineError::data(
            "report",
            format!("{}: schema version {} (expected {SCHEMA_VERSION})", path.display(), record.schema_version),
        ));
    }
    Ok(record)
}

/// Renders the text report stored in a run record.
pub fn cmd_report(path: &Path) -> Result<String, PipelineError> {
    let record = load_record(path)?;
    Ok(format!("run: {} ({}, {})\n\n{}", record.run_name, record.classifier, record.extractor, render_report(&record.report)))
}
