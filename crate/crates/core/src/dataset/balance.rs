use rand::seq::{IndexedRandom, SliceRandom};

use super::{DatasetError, LabeledDataset};
use crate::rng::seeded;

/// Random oversampling to the majority count.
///
/// Every class below the largest class count `T` gains `T - count` samples
/// drawn with replacement from its own members; classes already at `T` are
/// untouched, so the undersampling stage of the oversample/undersample
/// pipeline reduces to the identity. The result is shuffled with the same
/// generator. Samples are duplicated by reference, never synthesized.
pub fn rebalance(ds: &LabeledDataset, seed: u64) -> Result<LabeledDataset, DatasetError> {
    let counts = ds.class_counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(DatasetError::EmptyClass(empty));
    }
    let target = counts.iter().copied().max().unwrap_or(0);
    let mut rng = seeded(seed, 0);
    let mut out = ds.samples.clone();
    for (class_id, &count) in counts.iter().enumerate() {
        if count == target {
            continue;
        }
        let members: Vec<_> = ds.samples.iter().filter(|s| s.class_id as usize == class_id).collect();
        for _ in count..target {
            let pick = members.choose(&mut rng).expect("class is non-empty");
            out.push((*pick).clone());
        }
    }
    out.shuffle(&mut rng);
    Ok(ds.with_samples(out))
}
