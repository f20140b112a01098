//! Flat `section.key = value` configuration.
//!
//! Lines starting with `#` are comments; values may be wrapped in double
//! quotes. Every key can be overridden from the command line with
//! `--section.key value` or `--section.key=value`. Unknown keys are errors.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classifiers::{ForestConfig, GbdtConfig, LinearSvcConfig, MaxFeatures, RoundSemantics};
use crate::dataset::SplitFractions;
use crate::preprocess::PreprocessConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorKind {
    Toy,
    Onnx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Gbdt,
    Forest,
    Svc,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Gbdt => "gbdt",
            ClassifierKind::Forest => "forest",
            ClassifierKind::Svc => "svc",
        }
    }
}

/// Where log-loss probabilities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbSource {
    /// The head's own probabilities; heads without them fall back to `Hard`.
    Model,
    /// One-hot rows of the predicted labels.
    Hard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input_dir: PathBuf,
    pub work_dir: PathBuf,
    /// Defaults to `<input_dir>/labels.csv`.
    pub labels: Option<PathBuf>,
    pub allowlist: Option<PathBuf>,
    /// Defaults to `<work_dir>/manifest.csv`.
    pub manifest: Option<PathBuf>,
    pub thickness_mm: f64,
    pub preprocess: PreprocessConfig,
    pub debug_dump: bool,
    pub split: SplitFractions,
    pub split_seed: u64,
    pub balance_enabled: bool,
    pub balance_seed: u64,
    pub extractor: ExtractorKind,
    pub extractor_seed: u64,
    pub extractor_dim: usize,
    pub extractor_sidecar: Option<PathBuf>,
    pub classifier: ClassifierKind,
    pub classifier_seed: u64,
    pub gbdt: GbdtConfig,
    pub forest: ForestConfig,
    pub svc: LinearSvcConfig,
    pub prob_source: ProbSource,
    pub run_name: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input_dir: PathBuf::new(),
            work_dir: PathBuf::from("work"),
            labels: None,
            allowlist: None,
            manifest: None,
            thickness_mm: 1.0,
            preprocess: PreprocessConfig::default(),
            debug_dump: false,
            split: SplitFractions::default(),
            split_seed: 42,
            balance_enabled: true,
            balance_seed: 42,
            extractor: ExtractorKind::Toy,
            extractor_seed: 7,
            extractor_dim: 64,
            extractor_sidecar: None,
            classifier: ClassifierKind::Gbdt,
            classifier_seed: 0,
            gbdt: GbdtConfig::default(),
            forest: ForestConfig::default(),
            svc: LinearSvcConfig::default(),
            prob_source: ProbSource::Model,
            run_name: "run".to_string(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "paths.input_dir",
    "paths.work_dir",
    "paths.labels",
    "paths.allowlist",
    "paths.manifest",
    "ingest.thickness_mm",
    "preprocess.threshold_hu",
    "preprocess.out_side",
    "preprocess.tilt_enabled",
    "preprocess.debug_dump",
    "split.train",
    "split.val",
    "split.test",
    "split.seed",
    "balance.enabled",
    "balance.seed",
    "extractor.kind",
    "extractor.seed",
    "extractor.dim",
    "extractor.sidecar",
    "classifier.kind",
    "classifier.seed",
    "gbdt.rounds",
    "gbdt.learning_rate",
    "gbdt.max_depth",
    "gbdt.lambda",
    "gbdt.gamma",
    "gbdt.round_semantics",
    "forest.n_trees",
    "forest.max_features",
    "svc.c",
    "svc.epochs",
    "metrics.prob_source",
    "run.name",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, PipelineError>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| PipelineError::Config(format!("{key} = {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, PipelineError> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(PipelineError::Config(format!("{key} = {value:?}: expected true or false"))),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, PipelineError> {
    options.iter().find(|(name, _)| *name == value).map(|(_, v)| *v).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        PipelineError::Config(format!("{key} = {value:?}: expected one of {}", names.join(", ")))
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn opt_path_str(p: &Option<PathBuf>) -> String {
    p.as_deref().map(path_str).unwrap_or_default()
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let v = value;
        match key {
            "paths.input_dir" => self.input_dir = PathBuf::from(v),
            "paths.work_dir" => self.work_dir = PathBuf::from(v),
            "paths.labels" => self.labels = optional_path(v),
            "paths.allowlist" => self.allowlist = optional_path(v),
            "paths.manifest" => self.manifest = optional_path(v),
            "ingest.thickness_mm" => self.thickness_mm = parse(key, v)?,
            "preprocess.threshold_hu" => self.preprocess.threshold_hu = parse(key, v)?,
            "preprocess.out_side" => self.preprocess.out_side = parse(key, v)?,
            "preprocess.tilt_enabled" => self.preprocess.tilt_enabled = parse_bool(key, v)?,
            "preprocess.debug_dump" => self.debug_dump = parse_bool(key, v)?,
            "split.train" => self.split.train = parse(key, v)?,
            "split.val" => self.split.val = parse(key, v)?,
            "split.test" => self.split.test = parse(key, v)?,
            "split.seed" => self.split_seed = parse(key, v)?,
            "balance.enabled" => self.balance_enabled = parse_bool(key, v)?,
            "balance.seed" => self.balance_seed = parse(key, v)?,
            "extractor.kind" => {
                self.extractor = choice(key, v, &[("toy", ExtractorKind::Toy), ("onnx", ExtractorKind::Onnx)])?
            }
            "extractor.seed" => self.extractor_seed = parse(key, v)?,
            "extractor.dim" => self.extractor_dim = parse(key, v)?,
            "extractor.sidecar" => self.extractor_sidecar = optional_path(v),
            "classifier.kind" => {
                self.classifier = choice(
                    key,
                    v,
                    &[("gbdt", ClassifierKind::Gbdt), ("forest", ClassifierKind::Forest), ("svc", ClassifierKind::Svc)],
                )?
            }
            "classifier.seed" => self.classifier_seed = parse(key, v)?,
            "gbdt.rounds" => self.gbdt.rounds = parse(key, v)?,
            "gbdt.learning_rate" => self.gbdt.learning_rate = parse(key, v)?,
            "gbdt.max_depth" => self.gbdt.max_depth = parse(key, v)?,
            "gbdt.lambda" => self.gbdt.lambda = parse(key, v)?,
            "gbdt.gamma" => self.gbdt.gamma = parse(key, v)?,
            "gbdt.round_semantics" => {
                self.gbdt.round_semantics = choice(
                    key,
                    v,
                    &[("boosting_rounds", RoundSemantics::BoostingRounds), ("total_trees", RoundSemantics::TotalTrees)],
                )?
            }
            "forest.n_trees" => self.forest.n_trees = parse(key, v)?,
            "forest.max_features" => {
                self.forest.max_features = match v {
                    "sqrt" => MaxFeatures::Sqrt,
                    "all" => MaxFeatures::All,
                    n => MaxFeatures::Count(parse(key, n)?),
                }
            }
            "svc.c" => self.svc.c = parse(key, v)?,
            "svc.epochs" => self.svc.epochs = parse(key, v)?,
            "metrics.prob_source" => {
                self.prob_source = choice(key, v, &[("model", ProbSource::Model), ("hard", ProbSource::Hard)])?
            }
            "run.name" => self.run_name = v.to_string(),
            _ => return Err(PipelineError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Current value of `key`, formatted as it would be written in a file.
    pub fn get(&self, key: &str) -> Option<String> {
        let b = |v: bool| v.to_string();
        Some(match key {
            "paths.input_dir" => path_str(&self.input_dir),
            "paths.work_dir" => path_str(&self.work_dir),
            "paths.labels" => opt_path_str(&self.labels),
            "paths.allowlist" => opt_path_str(&self.allowlist),
            "paths.manifest" => opt_path_str(&self.manifest),
            "ingest.thickness_mm" => self.thickness_mm.to_string(),
            "preprocess.threshold_hu" => self.preprocess.threshold_hu.to_string(),
            "preprocess.out_side" => self.preprocess.out_side.to_string(),
            "preprocess.tilt_enabled" => b(self.preprocess.tilt_enabled),
            "preprocess.debug_dump" => b(self.debug_dump),
            "split.train" => self.split.train.to_string(),
            "split.val" => self.split.val.to_string(),
            "split.test" => self.split.test.to_string(),
            "split.seed" => self.split_seed.to_string(),
            "balance.enabled" => b(self.balance_enabled),
            "balance.seed" => self.balance_seed.to_string(),
            "extractor.kind" => match self.extractor {
                ExtractorKind::Toy => "toy".into(),
                ExtractorKind::Onnx => "onnx".into(),
            },
            "extractor.seed" => self.extractor_seed.to_string(),
            "extractor.dim" => self.extractor_dim.to_string(),
            "extractor.sidecar" => opt_path_str(&self.extractor_sidecar),
            "classifier.kind" => self.classifier.as_str().into(),
            "classifier.seed" => self.classifier_seed.to_string(),
            "gbdt.rounds" => self.gbdt.rounds.to_string(),
            "gbdt.learning_rate" => self.gbdt.learning_rate.to_string(),
            "gbdt.max_depth" => self.gbdt.max_depth.to_string(),
            "gbdt.lambda" => self.gbdt.lambda.to_string(),
            "gbdt.gamma" => self.gbdt.gamma.to_string(),
            "gbdt.round_semantics" => match self.gbdt.round_semantics {
                RoundSemantics::BoostingRounds => "boosting_rounds".into(),
                RoundSemantics::TotalTrees => "total_trees".into(),
            },
            "forest.n_trees" => self.forest.n_trees.to_string(),
            "forest.max_features" => match self.forest.max_features {
                MaxFeatures::Sqrt => "sqrt".into(),
                MaxFeatures::All => "all".into(),
                MaxFeatures::Count(n) => n.to_string(),
            },
            "svc.c" => self.svc.c.to_string(),
            "svc.epochs" => self.svc.epochs.to_string(),
            "metrics.prob_source" => match self.prob_source {
                ProbSource::Model => "model".into(),
                ProbSource::Hard => "hard".into(),
            },
            "run.name" => self.run_name.clone(),
            _ => return None,
        })
    }

    /// Every key with its current value, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(String, String)> {
        KEYS.iter().map(|k| (k.to_string(), self.get(k).unwrap_or_default())).collect()
    }

    /// Renders a config file that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse_str(text: &str) -> Result<Self, PipelineError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Loads a file. Relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse_str(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if !p.as_os_str().is_empty() && p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input_dir);
        fix(&mut self.work_dir);
        for p in [&mut self.labels, &mut self.allowlist, &mut self.manifest, &mut self.extractor_sidecar]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Applies `--key value` / `--key=value` pairs.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, args: &[S]) -> Result<(), PipelineError> {
        let mut it = args.iter().map(AsRef::as_ref);
        while let Some(arg) = it.next() {
            let flag = arg
                .strip_prefix("--")
                .ok_or_else(|| PipelineError::Config(format!("unexpected argument {arg:?}")))?;
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k, v.to_string()),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| PipelineError::Config(format!("--{flag} needs a value")))?;
                    (flag, v.to_string())
                }
            };
            self.set(key, &value)?;
        }
        Ok(())
    }

    pub fn labels_path(&self) -> PathBuf {
        self.labels.clone().unwrap_or_else(|| self.input_dir.join("labels.csv"))
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.manifest.clone().unwrap_or_else(|| self.work_dir.join("manifest.csv"))
    }

    pub fn run_dir(&self) -> PathBuf {
        self.work_dir.join("runs").join(&self.run_name)
    }

    pub fn gbdt_config(&self) -> GbdtConfig {
        GbdtConfig { seed: self.classifier_seed, ..self.gbdt.clone() }
    }

    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig { seed: self.classifier_seed, ..self.forest.clone() }
    }

    pub fn svc_config(&self) -> LinearSvcConfig {
        LinearSvcConfig { seed: self.classifier_seed, ..self.svc.clone() }
    }

    /// Checks everything that can be checked without touching data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.input_dir.as_os_str().is_empty() {
            return bad("paths.input_dir is not set".into());
        }
        if self.work_dir.as_os_str().is_empty() {
            return bad("paths.work_dir is not set".into());
        }
        if !(self.thickness_mm.is_finite() && self.thickness_mm > 0.0) {
            return bad(format!("ingest.thickness_mm must be positive, got {}", self.thickness_mm));
        }
        if !self.preprocess.threshold_hu.is_finite() {
            return bad("preprocess.threshold_hu must be finite".into());
        }
        if self.preprocess.out_side == 0 {
            return bad("preprocess.out_side must be positive".into());
        }
        self.split.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.extractor_dim == 0 {
            return bad("extractor.dim must be positive".into());
        }
        if self.extractor == ExtractorKind::Onnx && self.extractor_sidecar.is_none() {
            return bad("extractor.kind = onnx needs extractor.sidecar".into());
        }
        let run_name_ok = !self.run_name.is_empty()
            && self.run_name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            && self.run_name != "."
            && self.run_name != "..";
        if !run_name_ok {
            return bad(format!("run.name {:?} must be a plain file name", self.run_name));
        }
        let as_config = |e: crate::classifiers::ClassifierError| PipelineError::Config(e.to_string());
        self.gbdt.validate().map_err(as_config)?;
        if self.forest.n_trees == 0 || self.forest.max_features == MaxFeatures::Count(0) {
            return bad("forest.n_trees and forest.max_features must be positive".into());
        }
        if !(self.svc.c.is_finite() && self.svc.c > 0.0) || self.svc.epochs == 0 {
            return bad("svc.c and svc.epochs must be positive".into());
        }
        Ok(())
    }
}
