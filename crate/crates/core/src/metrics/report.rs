use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{
    balanced_accuracy, cohen_kappa, confusion_matrix, hamming, log_loss, per_class_prf, precision_recall_f1, roc_auc,
    Averaging, ConfusionMatrix, MetricsError, Prf, LOG_LOSS_EPS,
};
use crate::classifiers::ScoreMatrix;
use crate::dataset::OneHot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub name: String,
    #[serde(flatten)]
    pub scores: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub micro: Prf,
    #[serde(rename = "macro")]
    pub macro_: Prf,
    pub weighted: Prf,
    pub samples: Prf,
}

/// Panel metrics. Entries that are undefined for the data (a class with no
/// support, a single-class score column, no probabilities) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub accuracy: f64,
    pub hamming_score: f64,
    pub hamming_loss: f64,
    pub balanced_accuracy: Option<f64>,
    pub roc_auc: Option<f64>,
    pub kappa: Option<f64>,
    pub log_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classes: Vec<ClassRow>,
    pub averages: Averages,
    #[serde(flatten)]
    pub panel: Panel,
    pub confusion_matrix: Vec<Vec<u64>>,
    /// Precision/recall divisions by zero that were reported as 0.
    pub zero_divisions: usize,
}

fn defined(metric: &str, r: Result<f64, MetricsError>) -> Option<f64> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            warn!("{metric} undefined: {e}");
            None
        }
    }
}

/// Scores derivable from the confusion matrix alone; `roc_auc` and
/// `log_loss` are left empty.
pub fn classification_report<S: AsRef<str>>(cm: &ConfusionMatrix, class_names: &[S]) -> Result<EvaluationReport, MetricsError> {
    if class_names.len() != cm.k {
        return Err(MetricsError::ShapeMismatch(format!("{} names for {} classes", class_names.len(), cm.k)));
    }
    let total = cm.require_nonempty()?;
    let table = per_class_prf(cm)?;
    let classes = class_names
        .iter()
        .zip(&table.per_class)
        .map(|(name, scores)| ClassRow { name: name.as_ref().to_string(), scores: *scores })
        .collect();
    let averages = Averages {
        micro: precision_recall_f1(cm, Averaging::Micro)?,
        macro_: precision_recall_f1(cm, Averaging::Macro)?,
        weighted: precision_recall_f1(cm, Averaging::Weighted)?,
        samples: precision_recall_f1(cm, Averaging::Samples)?,
    };
    let accuracy = cm.trace() as f64 / total as f64;
    // Each misclassified one-hot row differs in exactly two positions.
    let hamming_loss = 2.0 * (total - cm.trace()) as f64 / (cm.k as f64 * total as f64);
    let panel = Panel {
        accuracy,
        hamming_score: accuracy,
        hamming_loss,
        balanced_accuracy: defined("balanced accuracy", balanced_accuracy(cm)),
        roc_auc: None,
        kappa: defined("kappa", cohen_kappa(cm)),
        log_loss: None,
    };
    let confusion_matrix = (0..cm.k).map(|t| (0..cm.k).map(|p| cm.get(t, p)).collect()).collect();
    Ok(EvaluationReport { classes, averages, panel, confusion_matrix, zero_divisions: table.zero_divisions })
}

/// Full panel for predictions. `scores` ranks samples per class for ROC AUC;
/// `probabilities` feeds log loss.
pub fn evaluate<S: AsRef<str>>(
    y_true: &[u8],
    y_pred: &[u8],
    class_names: &[S],
    scores: Option<&ScoreMatrix>,
    probabilities: Option<&ScoreMatrix>,
) -> Result<EvaluationReport, MetricsError> {
    let k = class_names.len();
    let cm = confusion_matrix(y_true, y_pred, k)?;
    let mut report = classification_report(&cm, class_names)?;
    let truth = OneHot::from_codes(y_true, k);
    let (score, loss) = hamming(&truth, &OneHot::from_codes(y_pred, k))?;
    report.panel.hamming_score = score;
    report.panel.hamming_loss = loss;
    if let Some(s) = scores {
        report.panel.roc_auc = defined("roc auc", roc_auc(&truth, s));
    }
    if let Some(p) = probabilities {
        report.panel.log_loss = Some(log_loss(y_true, p, LOG_LOSS_EPS)?);
    }
    Ok(report)
}

/// Plain-text table: per-class rows, a blank line, the four average rows,
/// then the panel metrics.
pub fn render_report(report: &EvaluationReport) -> String {
    let width = report
        .classes
        .iter()
        .map(|c| c.name.len())
        .chain(std::iter::once("weighted avg".len()))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:>width$} {:>9} {:>9} {:>9} {:>9}", "", "precision", "recall", "f1-score", "support");
    out.push('\n');
    let row = |out: &mut String, name: &str, p: &Prf| {
        let _ = writeln!(
            out,
            "{name:>width$} {:>9.2} {:>9.2} {:>9.2} {:>9}",
            p.precision, p.recall, p.f1, p.support
        );
    };
    for c in &report.classes {
        row(&mut out, &c.name, &c.scores);
    }
    out.push('\n');
    let a = &report.averages;
    for (name, p) in [("micro avg", &a.micro), ("macro avg", &a.macro_), ("weighted avg", &a.weighted), ("samples avg", &a.samples)] {
        row(&mut out, name, p);
    }
    out.push('\n');
    let p = &report.panel;
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    for (name, v) in [
        ("accuracy", Some(p.accuracy)),
        ("hamming score", Some(p.hamming_score)),
        ("hamming loss", Some(p.hamming_loss)),
        ("balanced accuracy", p.balanced_accuracy),
        ("roc auc", p.roc_auc),
        ("kappa", p.kappa),
        ("log loss", p.log_loss),
    ] {
        let _ = writeln!(out, "{name:>18} {:>9}", fmt(v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const NAMES: [&str; 3] = ["Depressed Fracture", "Linear Fracture", "Not Fractured"];

    #[test]
    fn hand_example_rows() {
        let cm = ConfusionMatrix::from_rows(&[vec![1, 0, 0], vec![0, 0, 1], vec![0, 0, 2]]);
        let r = classification_report(&cm, &NAMES).unwrap();
        assert!((r.classes[2].scores.f1 - 0.8).abs() < 1e-15);
        let text = render_report(&r);
        assert!(text.contains("     Not Fractured      0.67      1.00      0.80         2"), "{text}");
        assert!(text.contains("   micro avg      0.75      0.75      0.75         4"), "{text}");
    }

    #[test]
    fn report_json_keys() {
        let r = evaluate(&[0, 1, 2, 2], &[0, 2, 2, 2], &NAMES, None, None).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["hamming_score", "hamming_loss", "balanced_accuracy", "roc_auc", "kappa", "log_loss"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["precision", "recall", "f1", "support"] {
            assert!(v["classes"][0].get(key).is_some(), "{key}");
            assert!(v["averages"]["weighted"].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn cm_hamming_matches_onehot_hamming() {
        let (t, p) = ([0u8, 1, 2, 2, 1, 0], [0u8, 2, 2, 1, 1, 1]);
        let from_cm = classification_report(&confusion_matrix(&t, &p, 3).unwrap(), &NAMES).unwrap();
        let full = evaluate(&t, &p, &NAMES, None, None).unwrap();
        assert_eq!(from_cm.panel.hamming_loss, full.panel.hamming_loss);
        assert_eq!(from_cm.panel.hamming_score, full.panel.hamming_score);
    }
}
