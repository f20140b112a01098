use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{extract_ct_slice, parse_dicom, CtSlice, DicomError};

const THICKNESS_TOLERANCE_MM: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub thickness_mm: f64,
    /// File listing one path (relative to the root) per line. When set,
    /// only the listed files are read.
    pub allowlist: Option<PathBuf>,
    /// Files never read as slices, such as a labels table kept in the tree.
    pub exclude: Vec<PathBuf>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { thickness_mm: 1.0, allowlist: None, exclude: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct ScannedSlice {
    /// Path relative to the scanned root.
    pub path: PathBuf,
    /// Hex SHA-256 of the file bytes.
    pub content_hash: String,
    pub slice: CtSlice,
}

#[derive(Debug, Clone)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Series {
    /// Sorted by patient id, then instance number, then path.
    pub slices: Vec<ScannedSlice>,
    pub skipped: Vec<SkippedFile>,
    /// Parsed successfully but removed by the thickness filter.
    pub filtered_out: usize,
}

impl Series {
    pub fn by_patient(&self) -> BTreeMap<&str, Vec<&ScannedSlice>> {
        let mut out: BTreeMap<&str, Vec<&ScannedSlice>> = BTreeMap::new();
        for s in &self.slices {
            out.entry(s.slice.patient_id.as_str()).or_default().push(s);
        }
        out
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

fn read_allowlist(root: &Path, list: &Path) -> Result<Vec<PathBuf>, DicomError> {
    let text = fs::read_to_string(list).map_err(|e| DicomError::Io(format!("{}: {e}", list.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| root.join(l))
        .collect())
}

/// Reads every file under `root`, keeping CT slices whose thickness is within
/// 0.01 mm of the filter. Unreadable or unparseable files are skipped with a
/// warning.
pub fn scan_series(root: &Path, opts: &ScanOptions) -> Result<Series, DicomError> {
    let mut files = match &opts.allowlist {
        Some(list) => read_allowlist(root, list)?,
        None => {
            let mut v = Vec::new();
            collect_files(root, &mut v).map_err(|e| DicomError::Io(format!("{}: {e}", root.display())))?;
            v
        }
    };
    files.sort();
    files.dedup();
    if !opts.exclude.is_empty() {
        let canon = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
        let excluded: Vec<PathBuf> = opts.exclude.iter().map(|p| canon(p)).collect();
        files.retain(|f| !excluded.contains(&canon(f)));
    }

    type Outcome = Result<(String, CtSlice), String>;
    let results: Vec<(PathBuf, Outcome)> = files
        .par_iter()
        .map(|path| {
            let rel = path.strip_prefix(root).unwrap_or(path).to_path_buf();
            let outcome = fs::read(path).map_err(|e| e.to_string()).and_then(|bytes| {
                let hash = hex::encode(Sha256::digest(&bytes));
                parse_dicom(&bytes)
                    .and_then(|m| extract_ct_slice(&m))
                    .map(|s| (hash, s))
                    .map_err(|e| e.to_string())
            });
            (rel, outcome)
        })
        .collect();

    let mut slices = Vec::new();
    let mut skipped = Vec::new();
    let mut filtered_out = 0;
    for (path, outcome) in results {
        match outcome {
            Ok((content_hash, slice)) => {
                if (slice.slice_thickness_mm - opts.thickness_mm).abs() < THICKNESS_TOLERANCE_MM {
                    slices.push(ScannedSlice { path, content_hash, slice });
                } else {
                    filtered_out += 1;
                }
            }
            Err(reason) => {
                warn!("skipping {}: {reason}", path.display());
                skipped.push(SkippedFile { path, reason });
            }
        }
    }
    if slices.is_empty() {
        return Err(DicomError::EmptySeries);
    }
    slices.sort_by(|a, b| {
        a.slice
            .patient_id
            .cmp(&b.slice.patient_id)
            .then(a.slice.instance_number.cmp(&b.slice.instance_number))
            .then_with(|| a.path.cmp(&b.path))
    });
    Ok(Series { slices, skipped, filtered_out })
}
