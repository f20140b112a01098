use super::MetricsError;
use crate::dataset::OneHot;

/// `(score, loss)` for indicator matrices. The loss is the fraction of the
/// `n x k` positions that differ; the score is the mean per-sample Jaccard
/// index of the positive sets (1 when both sets are empty).
pub fn hamming(y_true: &OneHot, y_pred: &OneHot) -> Result<(f64, f64), MetricsError> {
    if y_true.k != y_pred.k || y_true.data.len() != y_pred.data.len() {
        return Err(MetricsError::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            y_true.n_rows(),
            y_true.k,
            y_pred.n_rows(),
            y_pred.k
        )));
    }
    let n = y_true.n_rows();
    if n == 0 {
        return Err(MetricsError::ShapeMismatch("no samples".into()));
    }
    let mut mismatched = 0usize;
    let mut jaccard = 0.0;
    for i in 0..n {
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in y_true.row(i).iter().zip(y_pred.row(i)) {
            let (a, b) = (a != 0, b != 0);
            mismatched += usize::from(a != b);
            inter += usize::from(a && b);
            union += usize::from(a || b);
        }
        jaccard += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    }
    Ok((jaccard / n as f64, mismatched as f64 / y_true.data.len() as f64))
}
