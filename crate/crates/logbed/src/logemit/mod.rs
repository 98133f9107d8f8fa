//! Log emission: transforms simulation activity into structured log events,
//! adds the calibrated noise floor, models packet loss at the network sensor,
//! and assembles frozen, exportable datasets.

mod catalog;
mod dataset;
mod drops;
mod event;
mod noise;

use thiserror::Error;

pub use catalog::{
    emit_attack_events, loss_free_bundle, BIND_API_EXPOSURE, BIND_API_OPPORTUNITIES,
    SCHEMA_COLUMNS_EXPOSURE, SCHEMA_COLUMNS_OPPORTUNITIES, SIG_BIND_API, SIG_SCHEMA_COLUMNS,
    SIG_SELECT_CONCAT, SIG_SQL_ERRORS, SIG_UNION_SELECT,
};
pub use dataset::{
    assemble_dataset, export_dataset, import_dataset, run_fingerprint, strip_causes, GroundTruth,
    LogDataset, DATASET_SCHEMA_VERSION,
};
pub use drops::{apply_drop, DropCandidate};
pub use event::{Cause, LogEvent, LogSource};
pub use noise::{
    default_noise_profile, emit_noise, noise_profile_for, NoiseEntry, NoiseProfile,
    DEFAULT_NOISE_DISPERSION,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed dataset at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("dataset declares schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("ground-truth sidecar fingerprint {sidecar} does not match dataset {dataset}")]
    FingerprintMismatch { dataset: String, sidecar: String },
    #[error("dataset has no ground truth to export")]
    NoGroundTruth,
}
