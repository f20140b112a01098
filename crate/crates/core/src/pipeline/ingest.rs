use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::cache::{read_tensor, tensor_key, tensor_path, write_tensor};
use super::{PipelineConfig, PipelineError};
use crate::dataset::{sorted_class_names, write_manifest, LabeledDataset, LabeledSample, DEFAULT_CLASS_NAMES};
use crate::dicom::{scan_series, ScanOptions, ScannedSlice, SkippedFile};
use crate::preprocess::{pgm, preprocess_stages};

/// Labels from a `patient_id,class[,instance_number]` CSV. Rows with an
/// instance number label one slice and take precedence over patient rows.
#[derive(Debug, Clone, Default)]
pub struct SliceLabels {
    pub by_patient: HashMap<String, u8>,
    pub by_slice: HashMap<(String, i64), u8>,
}

impl SliceLabels {
    pub fn class_of(&self, patient_id: &str, instance: i64) -> Option<u8> {
        self.by_slice
            .get(&(patient_id.to_string(), instance))
            .or_else(|| self.by_patient.get(patient_id))
            .copied()
    }
}

pub fn read_labels(path: &Path, class_names: &[String]) -> Result<SliceLabels, PipelineError> {
    let err = |m: String| PipelineError::data("labels", format!("{}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let header = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let (Some(pc), Some(cc)) = (col("patient_id"), col("class")) else {
        return Err(err("header must contain patient_id and class".into()));
    };
    let ic = col("instance_number");
    let mut labels = SliceLabels::default();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let patient = rec.get(pc).unwrap_or("").to_string();
        let class = rec.get(cc).unwrap_or("");
        let code = class_names
            .iter()
            .position(|n| n == class)
            .ok_or_else(|| err(format!("row {row}: unknown class name {class:?}")))? as u8;
        if patient.is_empty() {
            return Err(err(format!("row {row}: empty patient_id")));
        }
        match ic.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
            Some(inst) => {
                let inst: i64 = inst.parse().map_err(|_| err(format!("row {row}: bad instance_number {inst:?}")))?;
                labels.by_slice.insert((patient, inst), code);
            }
            None => {
                labels.by_patient.insert(patient, code);
            }
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub manifest: PathBuf,
    /// `sample_ref,tensor` CSV locating each sample's cached tensor.
    pub tensor_index: PathBuf,
    pub slices: usize,
    /// Slices preprocessed in this call.
    pub processed: usize,
    /// Slices whose tensor was already cached.
    pub cached: usize,
    pub unlabeled: usize,
    pub filtered_out: usize,
    pub skipped: Vec<(PathBuf, String)>,
}

pub(crate) fn sample_ref(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

fn debug_name(sample_ref: &str) -> String {
    sample_ref.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect()
}

pub(crate) fn cache_dir(cfg: &PipelineConfig) -> PathBuf {
    cfg.work_dir.join("cache")
}

pub(crate) fn tensor_index_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.work_dir.join("tensor_index.csv")
}

/// Scans the input directory, preprocesses every labeled slice not already
/// in the cache, and writes the manifest and tensor index.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestSummary, PipelineError> {
    cfg.validate()?;
    let class_names = sorted_class_names(&DEFAULT_CLASS_NAMES);
    let labels = read_labels(&cfg.labels_path(), &class_names)?;
    let exclude = std::iter::once(cfg.labels_path()).chain(cfg.allowlist.clone()).collect();
    let opts = ScanOptions { thickness_mm: cfg.thickness_mm, allowlist: cfg.allowlist.clone(), exclude };
    let series = scan_series(&cfg.input_dir, &opts).map_err(|e| PipelineError::data("ingest", e))?;

    let (labeled, unlabeled): (Vec<&ScannedSlice>, Vec<&ScannedSlice>) = series
        .slices
        .iter()
        .partition(|s| labels.class_of(&s.slice.patient_id, s.slice.instance_number).is_some());
    for s in &unlabeled {
        warn!("no label for {} (patient {})", s.path.display(), s.slice.patient_id);
    }
    if labeled.is_empty() {
        return Err(PipelineError::data("ingest", "no labeled slices found"));
    }

    let cache = cache_dir(cfg);
    fs::create_dir_all(&cache).map_err(|e| PipelineError::internal("ingest", e))?;
    let debug_dir = cfg.work_dir.join("debug");
    if cfg.debug_dump {
        fs::create_dir_all(&debug_dir).map_err(|e| PipelineError::internal("ingest", e))?;
    }
    let processed = AtomicUsize::new(0);
    let keys: Vec<String> = labeled
        .par_iter()
        .map(|s| {
            let key = tensor_key(&s.content_hash, &cfg.preprocess);
            let path = tensor_path(&cache, &key);
            if read_tensor(&path).is_ok_and(|t| t.side == cfg.preprocess.out_side) {
                return Ok(key);
            }
            let stages = preprocess_stages(&s.slice, &cfg.preprocess)
                .map_err(|e| PipelineError::data("preprocess", format!("{}: {e}", s.path.display())))?;
            write_tensor(&path, &stages.output).map_err(|e| PipelineError::internal("preprocess", e))?;
            if cfg.debug_dump {
                let base = debug_dir.join(debug_name(&sample_ref(&s.path)));
                let dump = |suffix: &str| base.with_extension(format!("{suffix}.pgm"));
                pgm::write_hu(&dump("hu"), &stages.hu)
                    .and_then(|_| pgm::write_mask(&dump("mask"), &stages.mask))
                    .and_then(|_| pgm::write_hu(&dump("aligned"), &stages.aligned))
                    .and_then(|_| pgm::write_tensor(&dump("out"), &stages.output))
                    .map_err(|e| PipelineError::internal("preprocess", e))?;
            }
            processed.fetch_add(1, Ordering::Relaxed);
            Ok(key)
        })
        .collect::<Result<_, PipelineError>>()?;

    let mut ds = LabeledDataset::new(class_names);
    let mut index = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| PipelineError::internal("ingest", e);
    index.write_record(["sample_ref", "tensor"]).map_err(io_err)?;
    for (s, key) in labeled.iter().zip(&keys) {
        let r = sample_ref(&s.path);
        let class_id = labels.class_of(&s.slice.patient_id, s.slice.instance_number).unwrap_or_default();
        index.write_record([r.as_str(), key.as_str()]).map_err(io_err)?;
        ds.samples.push(LabeledSample { patient_id: s.slice.patient_id.clone(), sample_ref: r, class_id });
    }
    let index_bytes = index.into_inner().map_err(|e| PipelineError::internal("ingest", e))?;
    let tensor_index = tensor_index_path(cfg);
    fs::write(&tensor_index, index_bytes).map_err(|e| PipelineError::internal("ingest", e))?;
    let manifest = cfg.manifest_path();
    if let Some(parent) = manifest.parent() {
        fs::create_dir_all(parent).map_err(|e| PipelineError::internal("ingest", e))?;
    }
    let file = fs::File::create(&manifest).map_err(|e| PipelineError::internal("ingest", e))?;
    write_manifest(file, &ds).map_err(|e| PipelineError::internal("ingest", e))?;

    let processed = processed.into_inner();
    let summary = IngestSummary {
        manifest,
        tensor_index,
        slices: labeled.len(),
        processed,
        cached: labeled.len() - processed,
        unlabeled: unlabeled.len(),
        filtered_out: series.filtered_out,
        skipped: series.skipped.into_iter().map(|SkippedFile { path, reason }| (path, reason)).collect(),
    };
    info!(
        "ingest: {} slices ({} preprocessed, {} cached), {} skipped, {} filtered by thickness",
        summary.slices,
        summary.processed,
        summary.cached,
        summary.skipped.len(),
        summary.filtered_out
    );
    Ok(summary)
}

/// `sample_ref -> tensor file` from the index written by [`cmd_ingest`].
pub(crate) fn read_tensor_index(cfg: &PipelineConfig) -> Result<HashMap<String, PathBuf>, PipelineError> {
    let path = tensor_index_path(cfg);
    let err = |e: &dyn std::fmt::Display| PipelineError::data("load", format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(&path).map_err(|e| err(&e))?;
    let cache = cache_dir(cfg);
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(&e))?;
        out.insert(rec[0].to_string(), tensor_path(&cache, &rec[1]));
    }
    Ok(out)
}
