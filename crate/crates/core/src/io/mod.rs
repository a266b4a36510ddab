//! Dataset container, plane selection, CSV tables, WAV and little-endian
//! binary helpers.

pub mod binary;
mod dataset;
mod plane;
pub mod table;
pub mod wav;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dsp::{DspError, Ear};

pub use dataset::{load_dataset, save_dataset, Dataset, DatasetManifest, ManifestEntry, Preset, MANIFEST_VERSION};
pub use plane::{angular_distance, select_plane, Circle, Plane};
pub use table::{fmt_f64, Table};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("IoError: {}: {source}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<stream>".into()))]
    Io {
        path: Option<PathBuf>,
        #[source]
        source: std::io::Error,
    },
    #[error("CsvError: {0}")]
    Csv(#[from] csv::Error),
    #[error("ManifestSchemaError: {0}")]
    ManifestSchemaError(String),
    #[error("BlobSizeMismatch: expected {expected} bytes, found {got}")]
    BlobSizeMismatch { expected: u64, got: u64 },
    #[error("DuplicateDirection: azimuth {azimuth_deg}, elevation {elevation_deg}, ear {}", ear.as_str())]
    DuplicateDirection {
        azimuth_deg: f64,
        elevation_deg: f64,
        ear: Ear,
    },
    #[error("EmptyPlane: no {ear} records on the {plane}", ear = ear.as_str())]
    EmptyPlane { plane: String, ear: Ear },
    #[error("InvalidRecord: entry {index}: {source}")]
    InvalidRecord {
        index: usize,
        #[source]
        source: DspError,
    },
    #[error("FormatError: {0}")]
    FormatError(String),
    #[error("WavError: {0}")]
    Wav(#[from] hound::Error),
}

impl IoError {
    pub fn at(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: Some(path.to_path_buf()),
            source,
        }
    }
}

impl From<std::io::Error> for IoError {
    fn from(source: std::io::Error) -> Self {
        IoError::Io { path: None, source }
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::ManifestSchemaError(e.to_string())
    }
}
