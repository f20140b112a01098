use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use sha2::{Digest, Sha256};

use super::cache::read_tensor;
use super::config::{ClassifierKind, ExtractorKind, ProbSource};
use super::ingest::{cmd_ingest, read_tensor_index};
use super::record::{PartitionCounts, RunRecord, SCHEMA_VERSION};
use super::{svg, PipelineConfig, PipelineError};
use crate::classifiers::{
    save_model, train_forest, train_gbdt_with_history, train_linear_svc, ClassifierError, Model, TrainingHistory,
};
use crate::dataset::{grouped_split, load_manifest, rebalance, write_split, LabeledDataset, DEFAULT_CLASS_NAMES};
use crate::features::{extract_features, save_feature_store, toy_extractor, FeatureExtractor, FeatureMatrix, FeaturesError, OnnxExtractor};
use crate::metrics::{evaluate, hard_probabilities, render_report};
use crate::preprocess::TensorImage;

struct Timer {
    timings: BTreeMap<String, f64>,
    started: Instant,
}

impl Timer {
    fn new() -> Self {
        Self { timings: BTreeMap::new(), started: Instant::now() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.insert(stage.to_string(), (now - self.started).as_secs_f64() * 1000.0);
        self.started = now;
    }
}

fn build_extractor(cfg: &PipelineConfig) -> Result<FeatureExtractor, PipelineError> {
    let ex = match cfg.extractor {
        ExtractorKind::Toy => FeatureExtractor::Toy(toy_extractor(cfg.extractor_seed, cfg.extractor_dim, cfg.preprocess.out_side)),
        ExtractorKind::Onnx => {
            let sidecar = cfg.extractor_sidecar.as_deref().unwrap_or(Path::new(""));
            let onnx = OnnxExtractor::from_sidecar_path(sidecar).map_err(|e| match e {
                FeaturesError::BackendUnavailable(_) | FeaturesError::Sidecar(_) => PipelineError::config("extract", e),
                other => PipelineError::data("extract", other),
            })?;
            FeatureExtractor::Onnx(onnx)
        }
    };
    if ex.input_side() != cfg.preprocess.out_side {
        return Err(PipelineError::config(
            "extract",
            format!("extractor input side {} differs from preprocess.out_side {}", ex.input_side(), cfg.preprocess.out_side),
        ));
    }
    Ok(ex)
}

fn fingerprint(ds: &LabeledDataset) -> String {
    let mut refs: Vec<&str> = ds.samples.iter().map(|s| s.sample_ref.as_str()).collect();
    refs.sort_unstable();
    let mut h = Sha256::new();
    for r in refs {
        h.update(r.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn classifier_error(e: ClassifierError) -> PipelineError {
    match e {
        ClassifierError::InvalidConfig(_) => PipelineError::config("train", e),
        other => PipelineError::data("train", other),
    }
}

fn write_artifact(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|e| PipelineError::internal("write", format!("{}: {e}", path.display())))
}

fn artifact_path(p: &Path) -> String {
    p.display().to_string()
}

/// Runs ingest, then split, train-only balancing, feature extraction,
/// training and evaluation on the test partition. Outputs go to
/// `<work_dir>/runs/<run.name>/`.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunRecord, PipelineError> {
    cfg.validate()?;
    let mut timer = Timer::new();
    let ingest = cmd_ingest(cfg)?;
    timer.lap("ingest");

    let ds = load_manifest(&ingest.manifest, &DEFAULT_CLASS_NAMES).map_err(|e| PipelineError::data("load", e))?;
    let split = grouped_split(&ds, cfg.split, cfg.split_seed).map_err(|e| PipelineError::data("split", e))?;
    let run_dir = cfg.run_dir();
    fs::create_dir_all(&run_dir).map_err(|e| PipelineError::internal("write", e))?;
    let split_dir = run_dir.join("split");
    write_split(&split_dir, &split, cfg.split, cfg.split_seed).map_err(|e| PipelineError::internal("split", e))?;
    timer.lap("split");

    let train = if cfg.balance_enabled {
        rebalance(&split.train, cfg.balance_seed).map_err(|e| PipelineError::data("balance", e))?
    } else {
        split.train.clone()
    };
    timer.lap("balance");

    // Each distinct sample is loaded and extracted once; partitions select rows.
    let index = read_tensor_index(cfg)?;
    let mut row_of: HashMap<&str, usize> = HashMap::new();
    let mut images: Vec<TensorImage> = Vec::new();
    for s in &ds.samples {
        if row_of.contains_key(s.sample_ref.as_str()) {
            continue;
        }
        let path = index
            .get(&s.sample_ref)
            .ok_or_else(|| PipelineError::data("load", format!("{} has no cached tensor", s.sample_ref)))?;
        let img = read_tensor(path).map_err(|e| PipelineError::data("load", format!("{}: {e}", path.display())))?;
        row_of.insert(s.sample_ref.as_str(), images.len());
        images.push(img);
    }
    timer.lap("load");

    let extractor = build_extractor(cfg)?;
    let all = extract_features(&images, &extractor).map_err(|e| PipelineError::data("extract", e))?;
    let rows = |part: &LabeledDataset| -> Vec<usize> { part.samples.iter().map(|s| row_of[s.sample_ref.as_str()]).collect() };
    let (x_train, x_val, x_test) = (all.select_rows(&rows(&train)), all.select_rows(&rows(&split.val)), all.select_rows(&rows(&split.test)));
    let (y_train, y_val, y_test) = (train.labels(), split.val.labels(), split.test.labels());
    timer.lap("extract");

    let k = ds.n_classes();
    let (model, history): (Model, Option<TrainingHistory>) = match cfg.classifier {
        ClassifierKind::Gbdt => {
            let validation = (x_val.n() > 0).then_some((&x_val, y_val.as_slice()));
            let (m, h) = train_gbdt_with_history(&x_train, &y_train, k, &cfg.gbdt_config(), validation).map_err(classifier_error)?;
            (Model::Gbdt(m), Some(h))
        }
        ClassifierKind::Forest => (Model::Forest(train_forest(&x_train, &y_train, k, &cfg.forest_config()).map_err(classifier_error)?), None),
        ClassifierKind::Svc => (Model::Svc(train_linear_svc(&x_train, &y_train, k, &cfg.svc_config()).map_err(classifier_error)?), None),
    };
    timer.lap("train");

    let report = evaluate_on(&model, &x_test, &y_test, &ds.class_names, cfg.prob_source)?;
    timer.lap("evaluate");

    let mut artifacts = BTreeMap::new();
    let mut put = |name: &str, path: PathBuf| artifacts.insert(name.to_string(), artifact_path(&path));
    put("manifest", ingest.manifest.clone());
    put("tensor_index", ingest.tensor_index.clone());
    for part in ["train", "val", "test"] {
        put(&format!("split_{part}"), split_dir.join(format!("{part}.csv")));
    }
    put("split_sidecar", split_dir.join("split.json"));

    let model_path = run_dir.join(format!("model_{}.mdl", model.kind_name()));
    save_model(&model_path, &model).map_err(|e| PipelineError::internal("write", e))?;
    put("model", model_path);
    for (name, fm, labels) in [("train", &x_train, &y_train), ("test", &x_test, &y_test)] {
        let path = run_dir.join(format!("features_{name}.fvs"));
        save_feature_store(fm, labels, &path).map_err(|e| PipelineError::internal("write", e))?;
        put(&format!("features_{name}"), path);
    }

    let report_json = serde_json::to_string_pretty(&report).map_err(|e| PipelineError::internal("write", e))? + "\n";
    let report_json_path = run_dir.join("report.json");
    write_artifact(&report_json_path, report_json.as_bytes())?;
    put("report_json", report_json_path);
    let report_txt_path = run_dir.join("report.txt");
    write_artifact(&report_txt_path, render_report(&report).as_bytes())?;
    put("report_txt", report_txt_path);

    let counts = PartitionCounts {
        train_before_balance: split.train.class_counts(),
        train_after_balance: train.class_counts(),
        val: split.val.class_counts(),
        test: split.test.class_counts(),
    };
    let as_f64 = |v: &[usize]| v.iter().map(|&c| c as f64).collect::<Vec<_>>();
    let balance_svg = svg::grouped_bars(
        "Training class distribution",
        &ds.class_names,
        &[("before balancing", as_f64(&counts.train_before_balance)), ("after balancing", as_f64(&counts.train_after_balance))],
        "slices",
    );
    let balance_path = run_dir.join("class_balance.svg");
    write_artifact(&balance_path, balance_svg.as_bytes())?;
    put("class_balance_svg", balance_path);
    if let Some(h) = &history {
        let mut series = vec![("train", h.train_loss.clone())];
        if !h.val_loss.is_empty() {
            series.push(("validation", h.val_loss.clone()));
        }
        let loss_path = run_dir.join("loss_curve.svg");
        write_artifact(&loss_path, svg::line_chart("GBDT log loss", &series, "round", "log loss").as_bytes())?;
        put("loss_curve_svg", loss_path);
    }
    timer.lap("write");

    let record_path = run_dir.join("run_record.json");
    put("run_record", record_path.clone());
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        run_name: cfg.run_name.clone(),
        config: cfg.entries().into_iter().collect(),
        classifier: model.kind_name().to_string(),
        extractor: extractor.name(),
        class_names: ds.class_names.clone(),
        class_counts: counts,
        test_fingerprint: fingerprint(&split.test),
        timings_ms: timer.timings,
        artifacts,
        history,
        report,
    };
    let json = serde_json::to_string_pretty(&record).map_err(|e| PipelineError::internal("write", e))? + "\n";
    write_artifact(&record_path, json.as_bytes())?;
    info!(
        "run {}: test micro-F1 {:.4} on {} slices",
        cfg.run_name,
        record.report.averages.micro.f1,
        y_test.len()
    );
    Ok(record)
}

fn evaluate_on(
    model: &Model,
    x: &FeatureMatrix,
    y: &[u8],
    class_names: &[String],
    prob_source: ProbSource,
) -> Result<crate::metrics::EvaluationReport, PipelineError> {
    if x.n() == 0 {
        return Err(PipelineError::data("evaluate", "test partition is empty"));
    }
    let pred = model.predict(x).map_err(|e| PipelineError::internal("evaluate", e))?;
    let scores = model.scores(x).map_err(|e| PipelineError::internal("evaluate", e))?;
    let probabilities = match prob_source {
        ProbSource::Model => model.probabilities(x).map_err(|e| PipelineError::internal("evaluate", e))?,
        ProbSource::Hard => None,
    }
    .unwrap_or_else(|| hard_probabilities(&pred, class_names.len()));
    evaluate(y, &pred, class_names, Some(&scores), Some(&probabilities)).map_err(|e| PipelineError::data("evaluate", e))
}
