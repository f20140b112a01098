use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dims, check_training_set, ClassifierError, ScoreMatrix};
use crate::features::FeatureMatrix;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvcConfig {
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LinearSvcConfig {
    fn default() -> Self {
        Self { c: 1.0, epochs: 100, seed: 0 }
    }
}

/// One-vs-rest linear model. Row `k` of `weights` holds class `k`'s
/// `n_features` coefficients followed by its intercept weight.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvcModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub c: f64,
    pub weights: Vec<f64>,
}

impl LinearSvcModel {
    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.n_features + 1;
        &self.weights[k * w..(k + 1) * w]
    }
}

fn dot_augmented(w: &[f64], x: &[f32]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    for (wj, xj) in w[..d].iter().zip(x) {
        s += wj * f64::from(*xj);
    }
    s + w[d]
}

/// Stochastic subgradient descent on
/// `lambda/2 |w|^2 + mean_i max(0, 1 - y_i w.x_i)^2` with `lambda = 1/(C n)`
/// and step `1/(lambda t)`. The constant-1 intercept feature is regularized
/// like any other. Iterates are projected onto the ball of radius
/// `sqrt(2/lambda)`, which contains the optimum, and the returned weights
/// average the final epoch's iterates.
fn train_binary(fm: &FeatureMatrix, y: &[f64], lambda: f64, epochs: usize, seed: u64, stream: u64) -> Vec<f64> {
    let (n, d) = (fm.n(), fm.d());
    let radius = (2.0 / lambda).sqrt();
    let mut w = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seeded(seed, stream);
    let mut t = 0u64;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let x = fm.row(i);
            let margin = y[i] * dot_augmented(&w, x);
            let eta = 1.0 / (lambda * t as f64);
            let shrink = 1.0 - 1.0 / t as f64;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                let step = eta * 2.0 * (1.0 - margin) * y[i];
                for (wj, xj) in w[..d].iter_mut().zip(x) {
                    *wj += step * f64::from(*xj);
                }
                w[d] += step;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                for wj in w.iter_mut() {
                    *wj *= s;
                }
            }
            if epoch + 1 == epochs {
                for (a, wj) in avg.iter_mut().zip(&w) {
                    *a += wj;
                }
            }
        }
    }
    if epochs > 0 && n > 0 {
        for a in avg.iter_mut() {
            *a /= n as f64;
        }
    }
    avg
}

/// One binary squared-hinge problem per class (`+1` for the class, `-1` for
/// the rest). Class `k` shuffles with stream `k` of `cfg.seed`.
pub fn train_linear_svc(fm: &FeatureMatrix, labels: &[u8], n_classes: usize, cfg: &LinearSvcConfig) -> Result<LinearSvcModel, ClassifierError> {
    check_training_set(fm, labels, n_classes)?;
    if !(cfg.c.is_finite() && cfg.c > 0.0) {
        return Err(ClassifierError::InvalidConfig("svc C must be positive".into()));
    }
    if cfg.epochs == 0 {
        return Err(ClassifierError::InvalidConfig("svc epochs must be positive".into()));
    }
    let lambda = 1.0 / (cfg.c * fm.n() as f64);
    let rows: Vec<Vec<f64>> = (0..n_classes)
        .into_par_iter()
        .map(|k| {
            let y: Vec<f64> = labels.iter().map(|&l| if usize::from(l) == k { 1.0 } else { -1.0 }).collect();
            train_binary(fm, &y, lambda, cfg.epochs, cfg.seed, k as u64)
        })
        .collect();
    Ok(LinearSvcModel { n_classes, n_features: fm.d(), c: cfg.c, weights: rows.concat() })
}

/// `n x K` raw decision values `w_k . [x, 1]`.
pub fn decision_values(model: &LinearSvcModel, fm: &FeatureMatrix) -> Result<ScoreMatrix, ClassifierError> {
    check_dims(model.n_features, fm)?;
    let k = model.n_classes;
    let data = fm
        .rows()
        .flat_map(|x| (0..k).map(move |c| dot_augmented(model.row(c), x)))
        .collect();
    Ok(ScoreMatrix { n: fm.n(), k, data })
}

pub fn predict_svc(model: &LinearSvcModel, fm: &FeatureMatrix) -> Result<Vec<u8>, ClassifierError> {
    Ok(decision_values(model, fm)?.argmax())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_2d() -> (FeatureMatrix, Vec<u8>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30 {
            let t = i as f32 / 30.0;
            rows.push(vec![1.0 + t, 0.5 - t]);
            labels.push(0);
            rows.push(vec![-1.0 - t, 0.3 + t]);
            labels.push(1);
        }
        (FeatureMatrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn separable_training_set_is_fit() {
        let (fm, labels) = separable_2d();
        let model = train_linear_svc(&fm, &labels, 2, &LinearSvcConfig::default()).unwrap();
        assert_eq!(model.weights.len(), 2 * 3);
        assert_eq!(predict_svc(&model, &fm).unwrap(), labels);
    }

    #[test]
    fn one_row_per_class() {
        let (fm, mut labels) = separable_2d();
        labels[0] = 2;
        let model = train_linear_svc(&fm, &labels, 3, &LinearSvcConfig { epochs: 5, ..Default::default() }).unwrap();
        assert_eq!(model.weights.len(), 3 * (fm.d() + 1));
    }

    #[test]
    fn zero_features_give_constant_prediction() {
        let fm = FeatureMatrix::new(9, 4, vec![0.0; 36]).unwrap();
        let labels = [0, 1, 2, 0, 1, 2, 0, 0, 1];
        let model = train_linear_svc(&fm, &labels, 3, &LinearSvcConfig::default()).unwrap();
        let scores = decision_values(&model, &fm).unwrap();
        for i in 0..scores.n {
            for (c, v) in scores.row(i).iter().enumerate() {
                assert_eq!(*v, model.row(c)[4]);
            }
        }
        let pred = predict_svc(&model, &fm).unwrap();
        assert!(pred.iter().all(|&p| p == pred[0]));
    }

    #[test]
    fn single_class_is_rejected() {
        let (fm, _) = separable_2d();
        let err = train_linear_svc(&fm, &vec![1; fm.n()], 2, &LinearSvcConfig::default()).unwrap_err();
        assert_eq!(err, ClassifierError::DegenerateLabels);
    }
}
