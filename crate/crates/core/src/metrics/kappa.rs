use super::{ConfusionMatrix, MetricsError};

/// Cohen's kappa, `(p_o - p_e) / (1 - p_e)`.
///
/// Perfect agreement scores 1 even when only one class occurs, where the
/// formula itself is 0/0.
pub fn cohen_kappa(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let total = cm.require_nonempty()?;
    if cm.trace() == total {
        return Ok(1.0);
    }
    let total = total as f64;
    let p_o = cm.trace() as f64 / total;
    let p_e = (0..cm.k)
        .map(|c| cm.support(c) as f64 * cm.predicted(c) as f64)
        .sum::<f64>()
        / (total * total);
    if p_e >= 1.0 {
        return Err(MetricsError::DegenerateAgreement);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated() {
        let k = cohen_kappa(&ConfusionMatrix::from_rows(&[vec![4, 1], vec![2, 3]])).unwrap();
        assert!((k - 0.4).abs() < 1e-12);
    }

    #[test]
    fn diagonal_and_chance() {
        let diag = ConfusionMatrix::from_rows(&[vec![2, 0, 0], vec![0, 5, 0], vec![0, 0, 1]]);
        assert_eq!(cohen_kappa(&diag).unwrap(), 1.0);
        let constant = ConfusionMatrix::from_rows(&[vec![4, 0, 0], vec![4, 0, 0], vec![4, 0, 0]]);
        assert!(cohen_kappa(&constant).unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_class_agreement_is_perfect() {
        let cm = ConfusionMatrix::from_rows(&[vec![6, 0], vec![0, 0]]);
        assert_eq!(cohen_kappa(&cm).unwrap(), 1.0);
    }
}
