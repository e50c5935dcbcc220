//! File formats: actuator catalogs (JSON), task trajectories (CSV), design
//! configurations and parameter files (TOML), and the result bundle (JSON).
//!
//! Angles in files are degrees and are converted to radians at load time;
//! lengths stay in millimetres.

mod bundle;
mod catalog;
mod config;
mod design_file;
mod tasks;

use std::path::Path;

use thiserror::Error;

pub use bundle::{
    load_bundle, save_bundle, unix_now, BundleCandidate, CandidateKind, MergeError, Provenance, ResultBundle, RunInfo,
    BUNDLE_SCHEMA_VERSION,
};
pub use catalog::{catalog_from_str, catalog_to_string, find_actuator, load_catalog, save_catalog, toy_catalog};
pub use config::{load_config, ConfigSnapshot, DesignConfig};
pub use design_file::{load_baseline, load_design, BaselineFile, BaselineKind, DesignFile, DesignLengths, ResolveError};
pub use tasks::{
    load_task_file, load_tasks, parse_tasks, synthetic_tasks, write_task_csv, TASK_COLUMNS,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: {message}")]
    Write { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {field}: {message}")]
    Invalid { path: String, field: String, message: String },
    #[error("{path}: no samples")]
    Empty { path: String },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path}: time does not increase at data row {row}")]
    NonMonotoneTime { path: String, row: usize },
    #[error("{path}: bundle schema version {found} is not supported (expected {expected})")]
    VersionMismatch { path: String, found: u64, expected: u64 },
    #[error("{path}: corrupt bundle: {message}")]
    CorruptBundle { path: String, message: String },
}

impl IoError {
    fn invalid(path: &str, field: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Invalid { path: path.into(), field: field.into(), message: message.into() }
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read { path: display(path), message: e.to_string() })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| IoError::Write { path: display(path), message: e.to_string() })
}

/// Degrees to radians such that `to_degrees_exact` recovers the same value.
pub(crate) fn radians(deg: f64) -> f64 {
    deg.to_radians()
}

/// A degree value that converts back to exactly `rad`, preferring the
/// shortest decimal form within a few ulps of `rad.to_degrees()`.
pub fn degrees_exact(rad: f64) -> f64 {
    let guess = rad.to_degrees();
    if !guess.is_finite() {
        return guess;
    }
    let mut candidates = vec![guess];
    let (mut up, mut down) = (guess, guess);
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        candidates.extend([up, down]);
    }
    candidates
        .into_iter()
        .filter(|&d| radians(d) == rad)
        .min_by_key(|d| d.to_string().len())
        .unwrap_or(guess)
}
