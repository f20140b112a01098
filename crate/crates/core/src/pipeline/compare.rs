use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use super::record::{load_record, RunRecord};
use super::PipelineError;

/// Metric rows by model columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub models: Vec<String>,
    /// `(metric, one value per model)`; `None` where a metric is undefined.
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl Comparison {
    pub fn from_records(records: &[RunRecord]) -> Result<Self, PipelineError> {
        if records.len() < 2 {
            return Err(PipelineError::TooFewRecords(records.len()));
        }
        let first = &records[0];
        if let Some(other) = records.iter().find(|r| r.test_fingerprint != first.test_fingerprint) {
            return Err(PipelineError::MismatchedTestSets(first.run_name.clone(), other.run_name.clone()));
        }
        let models = records.iter().map(|r| format!("{} ({})", r.run_name, r.classifier)).collect();
        type Getter = fn(&RunRecord) -> Option<f64>;
        let metrics: [(&str, Getter); 7] = [
            ("f1 (micro)", |r| Some(r.report.averages.micro.f1)),
            ("hamming score", |r| Some(r.report.panel.hamming_score)),
            ("hamming loss", |r| Some(r.report.panel.hamming_loss)),
            ("balanced accuracy", |r| r.report.panel.balanced_accuracy),
            ("roc auc", |r| r.report.panel.roc_auc),
            ("kappa", |r| r.report.panel.kappa),
            ("log loss", |r| r.report.panel.log_loss),
        ];
        let rows = metrics
            .iter()
            .map(|(name, get)| (name.to_string(), records.iter().map(get).collect()))
            .collect();
        Ok(Self { models, rows })
    }

    pub fn render(&self) -> String {
        let metric_w = self.rows.iter().map(|(m, _)| m.len()).chain(["metric".len()]).max().unwrap_or(6);
        let col_w: Vec<usize> = self.models.iter().map(|m| m.len().max(8)).collect();
        let mut out = String::new();
        let _ = write!(out, "{:<metric_w$}", "metric");
        for (m, w) in self.models.iter().zip(&col_w) {
            let _ = write!(out, " | {m:>w$}");
        }
        out.push('\n');
        let _ = write!(out, "{}", "-".repeat(metric_w));
        for w in &col_w {
            let _ = write!(out, "-|-{}", "-".repeat(*w));
        }
        out.push('\n');
        for (metric, values) in &self.rows {
            let _ = write!(out, "{metric:<metric_w$}");
            for (v, w) in values.iter().zip(&col_w) {
                let cell = v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
                let _ = write!(out, " | {cell:>w$}");
            }
            out.push('\n');
        }
        out
    }
}

/// Loads run records and builds the metric grid.
pub fn cmd_compare(paths: &[PathBuf]) -> Result<Comparison, PipelineError> {
    if paths.len() < 2 {
        return Err(PipelineError::TooFewRecords(paths.len()));
    }
    let records = paths.iter().map(|p| load_record(p)).collect::<Result<Vec<_>, _>>()?;
    Comparison::from_records(&records)
}
