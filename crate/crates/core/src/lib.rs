//! Skull-fracture CT classification pipeline.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`dicom`] parses the uncompressed little-endian DICOM subset and builds
//!   [`dicom::CtSlice`] records.
//! * [`preprocess`] converts slices to Hounsfield units, strips background,
//!   corrects tilt and produces fixed-size normalized [`preprocess::TensorImage`]s.
//! * [`dataset`] handles manifests, label encoding, patient-grouped splits and
//!   random oversampling.
//! * [`features`] turns images into feature vectors and persists them.
//! * [`classifiers`] holds gradient-boosted trees, a random forest and a
//!   one-vs-rest linear SVC.
//! * [`metrics`] computes the evaluation panel and the per-class report.
//! * [`pipeline`] wires everything into the batch commands used by the CLI.

pub mod classifiers;
pub mod dataset;
pub mod dicom;
pub mod features;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod synth;
