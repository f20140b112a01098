//! Evaluation panel: confusion-matrix scores, Hamming score/loss, balanced
//! accuracy, macro one-vs-rest ROC AUC, Cohen's kappa, log loss, and the
//! per-class classification report.

mod confusion;
mod hamming;
mod kappa;
mod logloss;
mod report;
mod roc;
mod scores;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use hamming::hamming;
pub use kappa::cohen_kappa;
pub use logloss::{hard_probabilities, log_loss, LOG_LOSS_EPS};
pub use report::{classification_report, evaluate, render_report, EvaluationReport, Panel};
pub use roc::{binary_auc, roc_auc};
pub use scores::{accuracy, balanced_accuracy, per_class_prf, precision_recall_f1, Averaging, Prf, PrfTable};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("class {0} has no support")]
    ZeroSupportClass(usize),
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: u8, n_classes: usize },
    #[error("{left} true labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("class {0} column has only one class present")]
    SingleClassColumn(usize),
    #[error("expected agreement is 1; kappa undefined")]
    DegenerateAgreement,
    #[error("probability row {0} does not sum to 1")]
    BadProbabilityRow(usize),
}
