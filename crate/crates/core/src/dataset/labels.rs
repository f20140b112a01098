use serde::{Deserialize, Serialize};

/// Lexicographically sorted copy of `names`; position = integer code.
pub fn sorted_class_names<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    let mut v: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
    v.sort();
    v.dedup();
    v
}

/// N x K indicator matrix, one set entry per row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHot {
    pub k: usize,
    pub data: Vec<u8>,
}

impl OneHot {
    pub fn from_codes(codes: &[u8], k: usize) -> Self {
        let mut data = vec![0u8; codes.len() * k];
        for (i, &c) in codes.iter().enumerate() {
            data[i * k + c as usize] = 1;
        }
        Self { k, data }
    }

    pub fn n_rows(&self) -> usize {
        self.data.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    /// Index of the set entry in each row.
    pub fn codes(&self) -> Vec<u8> {
        (0..self.n_rows())
            .map(|i| self.row(i).iter().position(|&v| v == 1).unwrap_or(0) as u8)
            .collect()
    }
}

/// Integer codes and one-hot rows for class-name strings.
///
/// Codes follow the lexicographic order of `class_names`. Names outside the
/// configured set are a caller error; manifests are validated at load.
pub fn encode_labels<S: AsRef<str>, C: AsRef<str>>(names: &[S], class_names: &[C]) -> (Vec<u8>, OneHot) {
    let sorted = sorted_class_names(class_names);
    let codes: Vec<u8> = names
        .iter()
        .map(|n| {
            sorted
                .iter()
                .position(|c| c == n.as_ref())
                .unwrap_or_else(|| panic!("class name {:?} not configured", n.as_ref())) as u8
        })
        .collect();
    let onehot = OneHot::from_codes(&codes, sorted.len());
    (codes, onehot)
}

pub fn decode_labels<C: AsRef<str>>(codes: &[u8], class_names: &[C]) -> Vec<String> {
    let sorted = sorted_class_names(class_names);
    codes.iter().map(|&c| sorted[c as usize].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DEFAULT_CLASS_NAMES;

    #[test]
    fn canonical_three_classes() {
        let (codes, oh) = encode_labels(&DEFAULT_CLASS_NAMES, &DEFAULT_CLASS_NAMES);
        assert_eq!(codes, vec![0, 1, 2]);
        assert_eq!(oh.data, vec![1, 0, 0, 0, 1, 0, 0, 0, 1]);
    }

    #[test]
    fn repeated_and_single_class() {
        let (codes, _) = encode_labels(&["Not Fractured", "Not Fractured"], &DEFAULT_CLASS_NAMES);
        assert_eq!(codes, vec![2, 2]);
        let (codes, oh) = encode_labels(&["Linear Fracture"], &DEFAULT_CLASS_NAMES);
        assert_eq!(codes, vec![1]);
        assert_eq!(oh.row(0), &[0, 1, 0]);
    }

    #[test]
    fn codes_follow_lexicographic_order_not_config_order() {
        let cfg = ["Not Fractured", "Depressed Fracture", "Linear Fracture"];
        let (codes, _) = encode_labels(&["Depressed Fracture", "Not Fractured"], &cfg);
        assert_eq!(codes, vec![0, 2]);
    }

    #[test]
    fn decode_inverts_encode() {
        let names = ["Linear Fracture", "Not Fractured", "Depressed Fracture", "Linear Fracture"];
        let (codes, oh) = encode_labels(&names, &DEFAULT_CLASS_NAMES);
        assert_eq!(decode_labels(&codes, &DEFAULT_CLASS_NAMES), names);
        assert_eq!(oh.codes(), codes);
    }
}
