use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{build_gradient_tree, presort, GradientTreeParams, Tree};
use super::{check_dims, check_training_set, ClassifierError, Columns, ScoreMatrix};
use crate::features::FeatureMatrix;

/// How `GbdtConfig::rounds` is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundSemantics {
    /// Each round fits one tree per class.
    #[default]
    BoostingRounds,
    /// `rounds` is the total tree budget, so `rounds / K` boosting rounds run.
    TotalTrees,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub round_semantics: RoundSemantics,
    /// Carried for config symmetry; exact greedy boosting draws no randomness.
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            rounds: 500,
            learning_rate: 0.1,
            max_depth: 6,
            lambda: 1.0,
            gamma: 0.0,
            round_semantics: RoundSemantics::BoostingRounds,
            seed: 0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::InvalidConfig(m.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("gbdt learning_rate must be positive");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("gbdt lambda must be >= 0");
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("gbdt gamma must be >= 0");
        }
        Ok(())
    }

    /// Boosting rounds actually run for `n_classes` classes.
    pub fn effective_rounds(&self, n_classes: usize) -> usize {
        match self.round_semantics {
            RoundSemantics::BoostingRounds => self.rounds,
            RoundSemantics::TotalTrees => self.rounds / n_classes.max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub max_depth: usize,
    pub base_score: f64,
    /// `trees[r][k]` is round `r`'s tree for class `k`.
    pub trees: Vec<Vec<Tree>>,
}

impl GbdtModel {
    pub fn rounds(&self) -> usize {
        self.trees.len()
    }

    /// The same model keeping only its first `rounds` rounds.
    pub fn truncated(&self, rounds: usize) -> Self {
        let mut m = self.clone();
        m.trees.truncate(rounds);
        m
    }

    /// Raw additive margins, `n x K`.
    pub fn margins(&self, fm: &FeatureMatrix) -> Result<ScoreMatrix, ClassifierError> {
        check_dims(self.n_features, fm)?;
        let k = self.n_classes;
        let mut data = vec![self.base_score; fm.n() * k];
        for (i, out) in data.chunks_exact_mut(k).enumerate() {
            let x = fm.row(i);
            for round in &self.trees {
                for (m, tree) in out.iter_mut().zip(round) {
                    *m += tree.predict(x);
                }
            }
        }
        Ok(ScoreMatrix { n: fm.n(), k, data })
    }
}

/// Per-round mean log loss, recorded after each round's update.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub train_loss: Vec<f64>,
    /// Empty when no validation set was given.
    pub val_loss: Vec<f64>,
}

fn softmax_into(margins: &[f64], out: &mut [f64]) {
    let max = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, m) in out.iter_mut().zip(margins) {
        *o = (m - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

fn mean_log_loss(margins: &[f64], labels: &[u8], k: usize) -> f64 {
    let mut p = vec![0.0; k];
    let total: f64 = margins
        .chunks_exact(k)
        .zip(labels)
        .map(|(m, &y)| {
            softmax_into(m, &mut p);
            -p[usize::from(y)].max(1e-15).ln()
        })
        .sum();
    total / labels.len().max(1) as f64
}

pub fn train_gbdt(fm: &FeatureMatrix, labels: &[u8], n_classes: usize, cfg: &GbdtConfig) -> Result<GbdtModel, ClassifierError> {
    train_gbdt_with_history(fm, labels, n_classes, cfg, None).map(|(m, _)| m)
}

/// Softmax gradient boosting. Each round computes `p = softmax(margins)` and
/// fits one regression tree per class to `g = p - y`, `h = p (1 - p)`.
pub fn train_gbdt_with_history(
    fm: &FeatureMatrix,
    labels: &[u8],
    n_classes: usize,
    cfg: &GbdtConfig,
    validation: Option<(&FeatureMatrix, &[u8])>,
) -> Result<(GbdtModel, TrainingHistory), ClassifierError> {
    cfg.validate()?;
    check_training_set(fm, labels, n_classes)?;
    if fm.n() < n_classes {
        return Err(ClassifierError::TooFewSamples { needed: n_classes, got: fm.n() });
    }
    if let Some((vfm, vlabels)) = validation {
        check_dims(fm.d(), vfm)?;
        if vlabels.len() != vfm.n() {
            return Err(ClassifierError::LabelCountMismatch { rows: vfm.n(), labels: vlabels.len() });
        }
    }

    let (n, k) = (fm.n(), n_classes);
    let cols = Columns::from_matrix(fm);
    let sorted = presort(&cols);
    let params = GradientTreeParams {
        max_depth: cfg.max_depth,
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        learning_rate: cfg.learning_rate,
    };
    let mut model = GbdtModel {
        n_classes: k,
        n_features: fm.d(),
        learning_rate: cfg.learning_rate,
        lambda: cfg.lambda,
        gamma: cfg.gamma,
        max_depth: cfg.max_depth,
        base_score: 0.0,
        trees: Vec::new(),
    };
    let mut margins = vec![model.base_score; n * k];
    let mut val_margins = validation.map(|(v, _)| vec![model.base_score; v.n() * k]);
    let mut history = TrainingHistory::default();
    let mut p = vec![0.0; k];
    let mut grads = vec![vec![0.0; n]; k];
    let mut hess = vec![vec![0.0; n]; k];

    for _ in 0..cfg.effective_rounds(k) {
        for i in 0..n {
            softmax_into(&margins[i * k..(i + 1) * k], &mut p);
            let y = usize::from(labels[i]);
            for c in 0..k {
                let target = if c == y { 1.0 } else { 0.0 };
                grads[c][i] = p[c] - target;
                hess[c][i] = p[c] * (1.0 - p[c]);
            }
        }
        let round: Vec<Tree> = (0..k)
            .into_par_iter()
            .map(|c| build_gradient_tree(&cols, &sorted, &grads[c], &hess[c], params))
            .collect();

        for i in 0..n {
            let x = fm.row(i);
            for (c, tree) in round.iter().enumerate() {
                margins[i * k + c] += tree.predict(x);
            }
        }
        history.train_loss.push(mean_log_loss(&margins, labels, k));
        if let (Some(vm), Some((vfm, vlabels))) = (val_margins.as_mut(), validation) {
            for i in 0..vfm.n() {
                let x = vfm.row(i);
                for (c, tree) in round.iter().enumerate() {
                    vm[i * k + c] += tree.predict(x);
                }
            }
            history.val_loss.push(mean_log_loss(vm, vlabels, k));
        }
        model.trees.push(round);
    }
    Ok((model, history))
}

/// Softmax of the accumulated margins.
pub fn predict_proba_gbdt(model: &GbdtModel, fm: &FeatureMatrix) -> Result<ScoreMatrix, ClassifierError> {
    let mut scores = model.margins(fm)?;
    let k = scores.k;
    let mut p = vec![0.0; k];
    for row in scores.data.chunks_exact_mut(k) {
        softmax_into(row, &mut p);
        row.copy_from_slice(&p);
    }
    Ok(scores)
}
