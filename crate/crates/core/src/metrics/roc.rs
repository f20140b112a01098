use super::MetricsError;
use crate::classifiers::ScoreMatrix;
use crate::dataset::OneHot;

/// Mann-Whitney AUC of `scores` for the positive set, using average ranks so
/// ties count one half. `None` when either class is absent.
pub fn binary_auc(positive: &[bool], scores: &[f64]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the rank sum keeps tied average ranks integral.
    let mut rank_sum_x2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_x2 = (i + 1 + j + 1) as u128;
        let pos_in_group = order[i..=j].iter().filter(|&&s| positive[s]).count() as u128;
        rank_sum_x2 += avg_x2 * pos_in_group;
        i = j + 1;
    }
    let n_pos_u = n_pos as u128;
    let u_x2 = rank_sum_x2 - n_pos_u * (n_pos_u + 1);
    Some(u_x2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Unweighted mean over classes of the one-vs-rest AUC of each score column.
pub fn roc_auc(y_true: &OneHot, scores: &ScoreMatrix) -> Result<f64, MetricsError> {
    if y_true.k != scores.k || y_true.n_rows() != scores.n {
        return Err(MetricsError::ShapeMismatch(format!(
            "{}x{} labels vs {}x{} scores",
            y_true.n_rows(),
            y_true.k,
            scores.n,
            scores.k
        )));
    }
    let mut sum = 0.0;
    for c in 0..scores.k {
        let positive: Vec<bool> = (0..scores.n).map(|i| y_true.row(i)[c] != 0).collect();
        let column: Vec<f64> = (0..scores.n).map(|i| scores.row(i)[c]).collect();
        sum += binary_auc(&positive, &column).ok_or(MetricsError::SingleClassColumn(c))?;
    }
    Ok(sum / scores.k as f64)
}
