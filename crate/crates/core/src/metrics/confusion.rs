use serde::Serialize;

use super::MetricsError;

/// `k x k` counts; rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        Self { k, counts: vec![0; k * k] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let k = rows.len();
        assert!(rows.iter().all(|r| r.len() == k), "confusion matrix must be square");
        Self { k, counts: rows.concat() }
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    /// Row sum: samples whose true class is `c`.
    pub fn support(&self, c: usize) -> u64 {
        (0..self.k).map(|p| self.get(c, p)).sum()
    }

    /// Column sum: samples predicted as `c`.
    pub fn predicted(&self, c: usize) -> u64 {
        (0..self.k).map(|t| self.get(t, c)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.k).all(|t| (0..self.k).all(|p| t == p || self.get(t, p) == 0))
    }

    pub(crate) fn require_nonempty(&self) -> Result<u64, MetricsError> {
        match self.total() {
            0 => Err(MetricsError::EmptyMatrix),
            n => Ok(n),
        }
    }
}

pub fn confusion_matrix(y_true: &[u8], y_pred: &[u8], k: usize) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    let mut cm = ConfusionMatrix::zeros(k);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for label in [t, p] {
            if usize::from(label) >= k {
                return Err(MetricsError::LabelOutOfRange { label, n_classes: k });
            }
        }
        cm.counts[usize::from(t) * k + usize::from(p)] += 1;
    }
    Ok(cm)
}
