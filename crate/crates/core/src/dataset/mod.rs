//! Labeled sample manifests, label encoding, patient-grouped splitting and
//! random oversampling.

mod balance;
mod labels;
mod manifest;
mod split;

pub use balance::rebalance;
pub use labels::{decode_labels, encode_labels, sorted_class_names, OneHot};
pub use manifest::{load_manifest, read_manifest, write_manifest};
pub use split::{grouped_split, write_split, Split, SplitFractions, SplitSidecar};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Class names in code order (codes follow lexicographic order).
pub const DEFAULT_CLASS_NAMES: [&str; 3] = ["Depressed Fracture", "Linear Fracture", "Not Fractured"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}: unknown class name {name:?}")]
    UnknownClassName { row: usize, name: String },
    #[error("row {row}: duplicate sample_ref {sample_ref:?}")]
    DuplicateSampleRef { row: usize, sample_ref: String },
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("split needs at least 3 patients, found {0}")]
    TooFewPatients(usize),
    #[error("invalid split fractions: {0}")]
    BadFractions(String),
    #[error("class {0} has no samples")]
    EmptyClass(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledSample {
    pub patient_id: String,
    /// Path of a cached tensor or a feature-row index, as text.
    pub sample_ref: String,
    pub class_id: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub samples: Vec<LabeledSample>,
    /// Indexed by class id.
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(class_names: Vec<String>) -> Self {
        Self { samples: Vec::new(), class_names }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for s in &self.samples {
            counts[s.class_id as usize] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.class_id).collect()
    }

    /// Distinct patient ids, sorted.
    pub fn patients(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> = self.samples.iter().map(|s| s.patient_id.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn with_samples(&self, samples: Vec<LabeledSample>) -> Self {
        Self { samples, class_names: self.class_names.clone() }
    }
}
