use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use super::labels::sorted_class_names;
use super::{DatasetError, LabeledDataset, LabeledSample};

const HEADER: [&str; 3] = ["patient_id", "sample_ref", "class"];

/// Reads a `patient_id,sample_ref,class` manifest. Class names must match one
/// of `class_names` exactly; sample references must be unique.
pub fn load_manifest<C: AsRef<str>>(path: &Path, class_names: &[C]) -> Result<LabeledDataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    read_manifest(file, class_names)
}

pub fn read_manifest<R: Read, C: AsRef<str>>(reader: R, class_names: &[C]) -> Result<LabeledDataset, DatasetError> {
    let names = sorted_class_names(class_names);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(DatasetError::MalformedRow {
            row: 0,
            reason: format!("expected header {:?}, got {:?}", HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut seen = HashSet::new();
    let mut samples = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != 3 {
            return Err(DatasetError::MalformedRow { row, reason: format!("expected 3 fields, got {}", record.len()) });
        }
        let patient_id = record[0].trim().to_string();
        let sample_ref = record[1].trim().to_string();
        let class = &record[2];
        if patient_id.is_empty() || sample_ref.is_empty() {
            return Err(DatasetError::MalformedRow { row, reason: "empty patient_id or sample_ref".into() });
        }
        let class_id = names
            .iter()
            .position(|n| n == class)
            .ok_or_else(|| DatasetError::UnknownClassName { row, name: class.to_string() })?;
        if !seen.insert(sample_ref.clone()) {
            return Err(DatasetError::DuplicateSampleRef { row, sample_ref });
        }
        samples.push(LabeledSample { patient_id, sample_ref, class_id: class_id as u8 });
    }
    Ok(LabeledDataset { samples, class_names: names })
}

pub fn write_manifest<W: Write>(writer: W, ds: &LabeledDataset) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for s in &ds.samples {
        w.write_record([s.patient_id.as_str(), s.sample_ref.as_str(), ds.class_names[s.class_id as usize].as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DEFAULT_CLASS_NAMES;

    #[test]
    fn counts_classes() {
        let text = "patient_id,sample_ref,class\n\
                    P1,a.tns,Depressed Fracture\n\
                    P1,b.tns,Linear Fracture\n\
                    P2,c.tns,Not Fractured\n\
                    P3,d.tns,Not Fractured\n";
        let ds = read_manifest(text.as_bytes(), &DEFAULT_CLASS_NAMES).unwrap();
        assert_eq!(ds.class_counts(), vec![1, 1, 2]);
        assert_eq!(ds.samples[2].sample_ref, "c.tns");
    }

    #[test]
    fn rejects_unknown_class() {
        let text = "patient_id,sample_ref,class\nP1,a,Fractured\n";
        let err = read_manifest(text.as_bytes(), &DEFAULT_CLASS_NAMES).unwrap_err();
        assert!(matches!(err, DatasetError::UnknownClassName { row: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_duplicate_refs() {
        let text = "patient_id,sample_ref,class\nP1,a,Not Fractured\nP2,a,Not Fractured\n";
        let err = read_manifest(text.as_bytes(), &DEFAULT_CLASS_NAMES).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateSampleRef { row: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_short_rows_and_bad_header() {
        let text = "patient_id,sample_ref,class\nP1,a\n";
        assert!(matches!(
            read_manifest(text.as_bytes(), &DEFAULT_CLASS_NAMES).unwrap_err(),
            DatasetError::MalformedRow { row: 1, .. }
        ));
        let text = "id,ref,label\n";
        assert!(matches!(
            read_manifest(text.as_bytes(), &DEFAULT_CLASS_NAMES).unwrap_err(),
            DatasetError::MalformedRow { row: 0, .. }
        ));
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let ds = read_manifest("patient_id,sample_ref,class\n".as_bytes(), &DEFAULT_CLASS_NAMES).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.class_counts(), vec![0, 0, 0]);
    }

    #[test]
    fn write_then_read() {
        let text = "patient_id,sample_ref,class\nP1,\"x,y\",Linear Fracture\nP2,z,Not Fractured\n";
        let ds = read_manifest(text.as_bytes(), &DEFAULT_CLASS_NAMES).unwrap();
        let mut buf = Vec::new();
        write_manifest(&mut buf, &ds).unwrap();
        assert_eq!(read_manifest(buf.as_slice(), &DEFAULT_CLASS_NAMES).unwrap(), ds);
    }
}
