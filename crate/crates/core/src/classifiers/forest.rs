use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{midpoint, Tree, TreeNode};
use super::{check_dims, check_training_set, ClassifierError, Columns, ScoreMatrix};
use crate::features::FeatureMatrix;
use crate::rng::{seeded, Rng};

/// Candidate features drawn per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `max(1, floor(sqrt(d)))`.
    #[default]
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (d as f64).sqrt().floor() as usize,
            MaxFeatures::All => d,
            MaxFeatures::Count(c) => c.min(d),
        };
        m.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 200, max_features: MaxFeatures::Sqrt, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub n_classes: usize,
    pub n_features: usize,
    /// Resolved candidate count per node.
    pub max_features: usize,
    pub seed: u64,
    /// Leaves hold class ids.
    pub trees: Vec<Tree>,
}

/// Plurality winner, ties to the smallest class id.
pub fn plurality(votes: &[u32]) -> u8 {
    let mut best = 0;
    for (i, v) in votes.iter().enumerate() {
        if *v > votes[best] {
            best = i;
        }
    }
    best as u8
}

fn majority_class(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, c) in counts.iter().enumerate() {
        if *c > counts[best] {
            best = i;
        }
    }
    best
}

struct ClassTreeBuilder<'a> {
    cols: &'a Columns,
    labels: &'a [u8],
    n_classes: usize,
    max_features: usize,
    rng: Rng,
    nodes: Vec<TreeNode>,
}

struct GiniSplit {
    feature: usize,
    threshold: f64,
    /// Sum over children of `sum_k c_k^2 / n_child`; larger is purer.
    purity: f64,
}

impl ClassTreeBuilder<'_> {
    fn counts(&self, members: &[u32]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in members {
            c[usize::from(self.labels[i as usize])] += 1;
        }
        c
    }

    fn best_on_feature(&self, feature: usize, members: &mut [u32], total: &[usize]) -> Option<GiniSplit> {
        let x = self.cols.column(feature);
        members.sort_by(|&a, &b| x[a as usize].total_cmp(&x[b as usize]).then(a.cmp(&b)));
        let m = members.len();
        let mut left = vec![0usize; self.n_classes];
        let mut sq_left = 0.0f64;
        let mut sq_right: f64 = total.iter().map(|&c| (c * c) as f64).sum();
        let mut best: Option<GiniSplit> = None;
        for pos in 0..m - 1 {
            let (i, j) = (members[pos] as usize, members[pos + 1] as usize);
            let y = usize::from(self.labels[i]);
            let right_y = total[y] - left[y];
            sq_left += (2 * left[y] + 1) as f64;
            sq_right -= (2 * right_y - 1) as f64;
            left[y] += 1;
            if x[i] >= x[j] {
                continue;
            }
            let nl = (pos + 1) as f64;
            let purity = sq_left / nl + sq_right / (m as f64 - nl);
            if best.as_ref().is_none_or(|b| purity > b.purity) {
                best = Some(GiniSplit { feature, threshold: midpoint(x[i], x[j]), purity });
            }
        }
        best
    }

    fn grow(&mut self, mut members: Vec<u32>) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&members);
        let majority = majority_class(&counts);
        let pure = counts[majority] == members.len();
        let mut best: Option<GiniSplit> = None;
        if !pure {
            // Random feature order; constant features do not use up the budget.
            let d = self.cols.d;
            let mut order: Vec<usize> = (0..d).collect();
            let mut informative = 0;
            for drawn in 0..d {
                if informative == self.max_features {
                    break;
                }
                let pick = self.rng.random_range(drawn..d);
                order.swap(drawn, pick);
                if let Some(s) = self.best_on_feature(order[drawn], &mut members, &counts) {
                    informative += 1;
                    if best.as_ref().is_none_or(|b| s.purity > b.purity) {
                        best = Some(s);
                    }
                }
            }
        }
        let Some(split) = best else {
            self.nodes.push(TreeNode::Leaf { value: majority as f64 });
            return id;
        };
        let x = self.cols.column(split.feature);
        let (l, r): (Vec<u32>, Vec<u32>) = members.iter().partition(|&&i| x[i as usize] < split.threshold);
        drop(members);
        self.nodes.push(TreeNode::Split { feature: split.feature, threshold: split.threshold, left: 0, right: 0 });
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[id] = TreeNode::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

/// Bootstrap random forest of fully grown Gini trees. Tree `t` draws its
/// bootstrap and feature candidates from stream `t` of `cfg.seed`.
pub fn train_forest(fm: &FeatureMatrix, labels: &[u8], n_classes: usize, cfg: &ForestConfig) -> Result<ForestModel, ClassifierError> {
    check_training_set(fm, labels, n_classes)?;
    if fm.n() < 2 {
        return Err(ClassifierError::TooFewSamples { needed: 2, got: fm.n() });
    }
    if cfg.n_trees == 0 {
        return Err(ClassifierError::InvalidConfig("forest n_trees must be positive".into()));
    }
    if cfg.max_features == MaxFeatures::Count(0) {
        return Err(ClassifierError::InvalidConfig("forest max_features must be positive".into()));
    }
    let cols = Columns::from_matrix(fm);
    let n = fm.n();
    let max_features = cfg.max_features.resolve(fm.d());
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(cfg.seed, t as u64);
            let sample: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();
            let mut builder = ClassTreeBuilder { cols: &cols, labels, n_classes, max_features, rng, nodes: Vec::new() };
            builder.grow(sample);
            Tree { nodes: builder.nodes }
        })
        .collect();
    Ok(ForestModel { n_classes, n_features: fm.d(), max_features, seed: cfg.seed, trees })
}

/// Per-sample vote counts, one entry per class.
pub fn forest_votes(model: &ForestModel, fm: &FeatureMatrix) -> Result<Vec<Vec<u32>>, ClassifierError> {
    check_dims(model.n_features, fm)?;
    Ok(fm
        .rows()
        .map(|x| {
            let mut votes = vec![0u32; model.n_classes];
            for tree in &model.trees {
                votes[tree.predict(x) as usize] += 1;
            }
            votes
        })
        .collect())
}

pub fn predict_forest(model: &ForestModel, fm: &FeatureMatrix) -> Result<Vec<u8>, ClassifierError> {
    Ok(forest_votes(model, fm)?.iter().map(|v| plurality(v)).collect())
}

/// Vote fractions.
pub fn predict_proba_forest(model: &ForestModel, fm: &FeatureMatrix) -> Result<ScoreMatrix, ClassifierError> {
    let votes = forest_votes(model, fm)?;
    let t = model.trees.len() as f64;
    let data = votes.iter().flat_map(|v| v.iter().map(move |&c| f64::from(c) / t)).collect();
    Ok(ScoreMatrix { n: votes.len(), k: model.n_classes, data })
}
