use super::MetricsError;
use crate::classifiers::ScoreMatrix;

pub const LOG_LOSS_EPS: f64 = 1e-15;

const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Mean of `-ln p_true` after clipping each probability to `[eps, 1 - eps]`
/// and renormalizing the row.
pub fn log_loss(y_true: &[u8], probs: &ScoreMatrix, eps: f64) -> Result<f64, MetricsError> {
    if y_true.len() != probs.n {
        return Err(MetricsError::LengthMismatch { left: y_true.len(), right: probs.n });
    }
    if probs.n == 0 {
        return Err(MetricsError::ShapeMismatch("no samples".into()));
    }
    let mut total = 0.0;
    for (i, &y) in y_true.iter().enumerate() {
        if usize::from(y) >= probs.k {
            return Err(MetricsError::LabelOutOfRange { label: y, n_classes: probs.k });
        }
        let row = probs.row(i);
        let sum: f64 = row.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > ROW_SUM_TOLERANCE || row.iter().any(|p| *p < 0.0) {
            return Err(MetricsError::BadProbabilityRow(i));
        }
        let clipped_sum: f64 = row.iter().map(|p| p.clamp(eps, 1.0 - eps)).sum();
        let p = row[usize::from(y)].clamp(eps, 1.0 - eps) / clipped_sum;
        total -= p.ln();
    }
    Ok(total / probs.n as f64)
}

/// One-hot probability rows for hard predictions, for heads without
/// probability estimates.
pub fn hard_probabilities(y_pred: &[u8], k: usize) -> ScoreMatrix {
    let mut data = vec![0.0; y_pred.len() * k];
    for (i, &p) in y_pred.iter().enumerate() {
        data[i * k + usize::from(p)] = 1.0;
    }
    ScoreMatrix { n: y_pred.len(), k, data }
}
