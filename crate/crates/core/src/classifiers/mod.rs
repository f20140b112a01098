//! Classifier heads trained on extracted features: softmax gradient-boosted
//! trees, a bootstrap random forest with plurality voting, and a
//! one-vs-rest linear SVC.

mod codec;
mod forest;
mod gbdt;
mod svc;
mod tree;

pub use codec::{decode_model, encode_model, load_model, save_model, MODEL_MAGIC};
pub use forest::{forest_votes, plurality, predict_forest, predict_proba_forest, train_forest, ForestConfig, ForestModel, MaxFeatures};
pub use gbdt::{
    predict_proba_gbdt, train_gbdt, train_gbdt_with_history, GbdtConfig, GbdtModel, RoundSemantics, TrainingHistory,
};
pub use svc::{decision_values, predict_svc, train_linear_svc, LinearSvcConfig, LinearSvcModel};
pub use tree::{best_split, SplitCandidate, Tree, TreeNode};

use thiserror::Error;

use crate::features::FeatureMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifierError {
    #[error("training labels contain fewer than two distinct classes")]
    DegenerateLabels,
    #[error("model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{labels} labels for {rows} feature rows")]
    LabelCountMismatch { rows: usize, labels: usize },
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: u8, n_classes: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Codec(String),
}

/// Row-major `n x k` matrix of per-class scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub n: usize,
    pub k: usize,
    pub data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    /// Argmax per row, ties to the smallest class id.
    pub fn argmax(&self) -> Vec<u8> {
        (0..self.n).map(|i| argmax(self.row(i)) as u8).collect()
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_training_set(fm: &FeatureMatrix, labels: &[u8], n_classes: usize) -> Result<(), ClassifierError> {
    if labels.len() != fm.n() {
        return Err(ClassifierError::LabelCountMismatch { rows: fm.n(), labels: labels.len() });
    }
    if let Some(&label) = labels.iter().find(|&&l| usize::from(l) >= n_classes) {
        return Err(ClassifierError::LabelOutOfRange { label, n_classes });
    }
    let mut seen = vec![false; n_classes];
    for &l in labels {
        seen[usize::from(l)] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(ClassifierError::DegenerateLabels);
    }
    Ok(())
}

pub(crate) fn check_dims(expected: usize, fm: &FeatureMatrix) -> Result<(), ClassifierError> {
    if fm.d() != expected {
        return Err(ClassifierError::DimensionMismatch { expected, got: fm.d() });
    }
    Ok(())
}

/// Column-major f64 copy of a feature matrix, used by the tree learners.
pub(crate) struct Columns {
    pub n: usize,
    pub d: usize,
    pub values: Vec<f64>,
}

impl Columns {
    pub fn from_matrix(fm: &FeatureMatrix) -> Self {
        let (n, d) = (fm.n(), fm.d());
        let mut values = vec![0.0; n * d];
        for i in 0..n {
            for (j, v) in fm.row(i).iter().enumerate() {
                values[j * n + i] = f64::from(*v);
            }
        }
        Self { n, d, values }
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }
}

/// Any trained head, as stored in a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Gbdt(GbdtModel),
    Forest(ForestModel),
    Svc(LinearSvcModel),
}

impl Model {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::Gbdt(_) => "gbdt",
            Model::Forest(_) => "forest",
            Model::Svc(_) => "svc",
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Gbdt(m) => m.n_classes,
            Model::Forest(m) => m.n_classes,
            Model::Svc(m) => m.n_classes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Gbdt(m) => m.n_features,
            Model::Forest(m) => m.n_features,
            Model::Svc(m) => m.n_features,
        }
    }

    pub fn predict(&self, fm: &FeatureMatrix) -> Result<Vec<u8>, ClassifierError> {
        match self {
            Model::Gbdt(m) => Ok(predict_proba_gbdt(m, fm)?.argmax()),
            Model::Forest(m) => predict_forest(m, fm),
            Model::Svc(m) => predict_svc(m, fm),
        }
    }

    /// Ranking scores: class probabilities for GBDT, vote fractions for the
    /// forest, raw decision values for the SVC.
    pub fn scores(&self, fm: &FeatureMatrix) -> Result<ScoreMatrix, ClassifierError> {
        match self {
            Model::Gbdt(m) => predict_proba_gbdt(m, fm),
            Model::Forest(m) => predict_proba_forest(m, fm),
            Model::Svc(m) => decision_values(m, fm),
        }
    }

    /// Probability rows when the model defines them (GBDT, forest).
    pub fn probabilities(&self, fm: &FeatureMatrix) -> Result<Option<ScoreMatrix>, ClassifierError> {
        match self {
            Model::Gbdt(m) => predict_proba_gbdt(m, fm).map(Some),
            Model::Forest(m) => predict_proba_forest(m, fm).map(Some),
            Model::Svc(_) => Ok(None),
        }
    }
}
