use log::warn;
use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    Micro,
    Macro,
    Weighted,
    /// Mean over samples of per-sample scores.
    Samples,
}

/// Per-class scores plus the number of 0/0 divisions that were set to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PrfTable {
    pub per_class: Vec<Prf>,
    pub zero_divisions: usize,
}

fn ratio(num: u64, den: u64, zero_divisions: &mut usize) -> f64 {
    if den == 0 {
        *zero_divisions += 1;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// One-vs-rest precision, recall and F1 per class.
pub fn per_class_prf(cm: &ConfusionMatrix) -> Result<PrfTable, MetricsError> {
    cm.require_nonempty()?;
    let mut zero_divisions = 0;
    let per_class = (0..cm.k)
        .map(|c| {
            let tp = cm.get(c, c);
            let precision = ratio(tp, cm.predicted(c), &mut zero_divisions);
            let recall = ratio(tp, cm.support(c), &mut zero_divisions);
            Prf { precision, recall, f1: f1(precision, recall), support: cm.support(c) }
        })
        .collect();
    if zero_divisions > 0 {
        warn!("{zero_divisions} precision/recall divisions by zero set to 0");
    }
    Ok(PrfTable { per_class, zero_divisions })
}

pub fn precision_recall_f1(cm: &ConfusionMatrix, averaging: Averaging) -> Result<Prf, MetricsError> {
    let total = cm.require_nonempty()?;
    let table = per_class_prf(cm)?;
    let pcs = &table.per_class;
    Ok(match averaging {
        Averaging::Micro => {
            // Pooled TP over pooled TP+FP (and TP+FN): both equal the total,
            // so precision, recall and their harmonic mean are the accuracy.
            let acc = cm.trace() as f64 / total as f64;
            Prf { precision: acc, recall: acc, f1: acc, support: total }
        }
        Averaging::Macro => {
            let k = pcs.len() as f64;
            Prf {
                precision: pcs.iter().map(|p| p.precision).sum::<f64>() / k,
                recall: pcs.iter().map(|p| p.recall).sum::<f64>() / k,
                f1: pcs.iter().map(|p| p.f1).sum::<f64>() / k,
                support: total,
            }
        }
        Averaging::Weighted => {
            let w = |f: fn(&Prf) -> f64| pcs.iter().map(|p| f(p) * p.support as f64).sum::<f64>() / total as f64;
            Prf { precision: w(|p| p.precision), recall: w(|p| p.recall), f1: w(|p| p.f1), support: total }
        }
        Averaging::Samples => {
            // A single-label sample scores 1 on all three when its prediction
            // is right and 0 otherwise.
            let hits: u64 = (0..cm.k).map(|c| cm.get(c, c)).sum();
            let s = hits as f64 / total as f64;
            Prf { precision: s, recall: s, f1: s, support: total }
        }
    })
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    let total = cm.require_nonempty()?;
    Ok(cm.trace() as f64 / total as f64)
}

/// Unweighted mean of per-class recalls.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64, MetricsError> {
    cm.require_nonempty()?;
    let mut sum = 0.0;
    for c in 0..cm.k {
        let support = cm.support(c);
        if support == 0 {
            return Err(MetricsError::ZeroSupportClass(c));
        }
        sum += cm.get(c, c) as f64 / support as f64;
    }
    Ok(sum / cm.k as f64)
}
