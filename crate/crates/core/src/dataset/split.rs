use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{write_manifest, DatasetError, LabeledDataset};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { train: 0.5, val: 0.2, test: 0.3 }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(DatasetError::BadFractions(format!("{all:?} must all be positive")));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(DatasetError::BadFractions(format!("{all:?} sum to {sum}, not 1")));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LabeledDataset,
    pub val: LabeledDataset,
    pub test: LabeledDataset,
}

impl Split {
    pub fn parts(&self) -> [(&'static str, &LabeledDataset); 3] {
        [("train", &self.train), ("val", &self.val), ("test", &self.test)]
    }
}

/// Splits by patient so that every slice of a patient lands in one partition.
///
/// Patients are shuffled with the seeded generator and then assigned one at a
/// time to the partition whose slice deficit (target share of all slices
/// minus slices already assigned) is largest; ties go to the earlier
/// partition (train, val, test). Within a partition samples keep manifest
/// order.
pub fn grouped_split(ds: &LabeledDataset, fractions: SplitFractions, seed: u64) -> Result<Split, DatasetError> {
    fractions.validate()?;
    let mut patients = ds.patients();
    if patients.len() < 3 {
        return Err(DatasetError::TooFewPatients(patients.len()));
    }
    let mut slice_counts: HashMap<&str, usize> = HashMap::new();
    for s in &ds.samples {
        *slice_counts.entry(s.patient_id.as_str()).or_default() += 1;
    }
    patients.shuffle(&mut seeded(seed, 0));

    let total = ds.len() as f64;
    let targets = fractions.as_array().map(|f| f * total);
    let mut assigned = [0usize; 3];
    let mut partition_of: HashMap<&str, usize> = HashMap::new();
    for pid in &patients {
        let mut best = 0;
        let mut best_deficit = f64::NEG_INFINITY;
        for (k, target) in targets.iter().enumerate() {
            let deficit = target - assigned[k] as f64;
            if deficit > best_deficit {
                best = k;
                best_deficit = deficit;
            }
        }
        let count = slice_counts[pid.as_str()];
        assigned[best] += count;
        partition_of.insert(pid.as_str(), best);
    }

    let mut parts: [Vec<_>; 3] = Default::default();
    for s in &ds.samples {
        parts[partition_of[s.patient_id.as_str()]].push(s.clone());
    }
    let [train, val, test] = parts;
    Ok(Split { train: ds.with_samples(train), val: ds.with_samples(val), test: ds.with_samples(test) })
}

/// Contents of `split.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSidecar {
    pub seed: u64,
    pub fractions: SplitFractions,
    /// Per partition, per class name.
    pub class_counts: BTreeMap<String, BTreeMap<String, usize>>,
    pub patients: BTreeMap<String, usize>,
}

/// Writes `train.csv`, `val.csv`, `test.csv` and `split.json` into `dir`.
pub fn write_split(dir: &Path, split: &Split, fractions: SplitFractions, seed: u64) -> Result<SplitSidecar, DatasetError> {
    fs::create_dir_all(dir)?;
    let mut class_counts = BTreeMap::new();
    let mut patients = BTreeMap::new();
    for (name, part) in split.parts() {
        write_manifest(fs::File::create(dir.join(format!("{name}.csv")))?, part)?;
        let counts = part
            .class_names
            .iter()
            .cloned()
            .zip(part.class_counts())
            .collect::<BTreeMap<_, _>>();
        class_counts.insert(name.to_string(), counts);
        patients.insert(name.to_string(), part.patients().len());
    }
    let sidecar = SplitSidecar { seed, fractions, class_counts, patients };
    let json = serde_json::to_string_pretty(&sidecar).map_err(std::io::Error::other)?;
    fs::write(dir.join("split.json"), json)?;
    Ok(sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{LabeledSample, DEFAULT_CLASS_NAMES};

    fn roster(sizes: &[usize]) -> LabeledDataset {
        let mut ds = LabeledDataset::new(DEFAULT_CLASS_NAMES.iter().map(|s| s.to_string()).collect());
        for (p, &n) in sizes.iter().enumerate() {
            for i in 0..n {
                ds.samples.push(LabeledSample {
                    patient_id: format!("P{p:03}"),
                    sample_ref: format!("P{p:03}/{i}"),
                    class_id: (p % 3) as u8,
                });
            }
        }
        ds
    }

    #[test]
    fn uniform_patients_split_exactly() {
        let ds = roster(&[10; 10]);
        for seed in 0..5 {
            let s = grouped_split(&ds, SplitFractions::default(), seed).unwrap();
            assert_eq!(
                [s.train.patients().len(), s.val.patients().len(), s.test.patients().len()],
                [5, 2, 3]
            );
            assert_eq!([s.train.len(), s.val.len(), s.test.len()], [50, 20, 30]);
        }
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let ds = roster(&[7, 12, 9, 30, 4, 15, 11, 8, 20, 5, 6, 13]);
        let a = grouped_split(&ds, SplitFractions::default(), 11).unwrap();
        let b = grouped_split(&ds, SplitFractions::default(), 11).unwrap();
        assert_eq!(a, b);
        let distinct: std::collections::HashSet<Vec<String>> = (0..5)
            .map(|seed| grouped_split(&ds, SplitFractions::default(), seed).unwrap().train.patients())
            .collect();
        assert!(distinct.len() > 1, "all seeds gave the same train patients");
    }

    #[test]
    fn too_few_patients() {
        let ds = roster(&[5, 5]);
        assert!(matches!(
            grouped_split(&ds, SplitFractions::default(), 0).unwrap_err(),
            DatasetError::TooFewPatients(2)
        ));
    }

    #[test]
    fn bad_fractions() {
        let ds = roster(&[5, 5, 5]);
        let f = SplitFractions { train: 0.5, val: 0.2, test: 0.2 };
        assert!(matches!(grouped_split(&ds, f, 0).unwrap_err(), DatasetError::BadFractions(_)));
        let f = SplitFractions { train: 0.8, val: 0.0, test: 0.2 };
        assert!(matches!(grouped_split(&ds, f, 0).unwrap_err(), DatasetError::BadFractions(_)));
    }

    #[test]
    fn sidecar_records_counts() {
        let ds = roster(&[10; 10]);
        let s = grouped_split(&ds, SplitFractions::default(), 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let side = write_split(dir.path(), &s, SplitFractions::default(), 1).unwrap();
        let total: usize = side.class_counts.values().flat_map(|m| m.values()).sum();
        assert_eq!(total, 100);
        for f in ["train.csv", "val.csv", "test.csv", "split.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
