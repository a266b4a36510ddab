use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::dsp::{CoordinateSystem, Direction, Ear, HrirRecord};

pub const MANIFEST_VERSION: u32 = 1;

/// Shape presets for the three reference databases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Cipic,
    Kemar,
    Mips,
}

impl Preset {
    pub fn hrir_length(self) -> usize {
        match self {
            Preset::Cipic => 200,
            Preset::Kemar => 512,
            Preset::Mips => 1024,
        }
    }

    pub fn fs(self) -> f64 {
        44100.0
    }

    /// Expected records per ear, when the database fixes it.
    pub fn entries_per_ear(self) -> Option<usize> {
        match self {
            Preset::Cipic => Some(1250),
            Preset::Kemar | Preset::Mips => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Cipic => "cipic",
            Preset::Kemar => "kemar",
            Preset::Mips => "mips",
        }
    }

    fn check(self, fs: f64, len: usize, records: &[HrirRecord]) -> Vec<String> {
        let mut warnings = Vec::new();
        if len != self.hrir_length() {
            warnings.push(format!(
                "{} preset expects {}-sample HRIRs, manifest declares {len}",
                self.as_str(),
                self.hrir_length()
            ));
        }
        if fs != self.fs() {
            warnings.push(format!("{} preset expects fs = {} Hz, manifest declares {fs}", self.as_str(), self.fs()));
        }
        if let Some(expected) = self.entries_per_ear() {
            for ear in [Ear::Left, Ear::Right] {
                let n = records.iter().filter(|r| r.ear == ear).count();
                if n != 0 && n != expected {
                    warnings.push(format!(
                        "{} preset expects {expected} entries per ear, found {n} for the {} ear",
                        self.as_str(),
                        ear.as_str()
                    ));
                }
            }
        }
        warnings
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cipic" => Ok(Preset::Cipic),
            "kemar" => Ok(Preset::Kemar),
            "mips" => Ok(Preset::Mips),
            other => Err(format!("unknown preset '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub ear: Ear,
    /// Byte offset into the blob.
    pub offset: u64,
}

/// JSON manifest describing a float32 little-endian sample blob.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: u32,
    pub name: String,
    pub fs: f64,
    pub hrir_length: usize,
    pub coordinate_system: CoordinateSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Blob path, relative to the manifest's directory.
    pub blob: String,
    pub entries: Vec<ManifestEntry>,
}

/// Validated in-memory HRIR set.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub fs: f64,
    pub hrir_length: usize,
    pub coordinate_system: CoordinateSystem,
    pub preset: Option<Preset>,
    pub records: Vec<HrirRecord>,
    /// Preset cross-check findings; never fatal.
    pub warnings: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from records that share fs, length and coordinates.
    pub fn new(
        name: impl Into<String>,
        coordinate_system: CoordinateSystem,
        records: Vec<HrirRecord>,
    ) -> Result<Self, IoError> {
        let first = records
            .first()
            .ok_or_else(|| IoError::ManifestSchemaError("dataset has no entries".into()))?;
        let (fs, len) = (first.fs(), first.len());
        for r in &records {
            if r.fs() != fs || r.len() != len {
                return Err(IoError::ManifestSchemaError(format!(
                    "record at ({}, {}) has fs {} and length {}, dataset uses {fs} and {len}",
                    r.direction.azimuth_deg,
                    r.direction.elevation_deg,
                    r.fs(),
                    r.len()
                )));
            }
        }
        let mut records = records;
        for r in &mut records {
            r.coordinate_system = coordinate_system;
        }
        check_duplicates(records.iter().map(|r| (r.direction, r.ear)))?;
        Ok(Self {
            name: name.into(),
            fs,
            hrir_length: len,
            coordinate_system,
            preset: None,
            records,
            warnings: Vec::new(),
        })
    }

    pub fn with_preset(mut self, preset: Preset) -> Self {
        self.warnings = preset.check(self.fs, self.hrir_length, &self.records);
        self.preset = Some(preset);
        self
    }

    pub fn find(&self, direction: Direction, ear: Ear) -> Option<&HrirRecord> {
        self.records.iter().find(|r| r.ear == ear && r.direction == direction)
    }
}

fn check_duplicates(keys: impl Iterator<Item = (Direction, Ear)>) -> Result<(), IoError> {
    let mut seen = HashSet::new();
    for (d, ear) in keys {
        // -0.0 and 0.0 name the same direction.
        let key = ((d.azimuth_deg + 0.0).to_bits(), (d.elevation_deg + 0.0).to_bits(), ear);
        if !seen.insert(key) {
            return Err(IoError::DuplicateDirection {
                azimuth_deg: d.azimuth_deg,
                elevation_deg: d.elevation_deg,
                ear,
            });
        }
    }
    Ok(())
}

fn blob_path(manifest_path: &Path, blob: &str) -> PathBuf {
    manifest_path.parent().unwrap_or_else(|| Path::new("")).join(blob)
}

/// Parses a manifest and its blob.
pub fn load_dataset(manifest_path: impl AsRef<Path>) -> Result<Dataset, IoError> {
    let manifest_path = manifest_path.as_ref();
    let text = std::fs::read_to_string(manifest_path).map_err(|e| IoError::at(manifest_path, e))?;
    let m: DatasetManifest = serde_json::from_str(&text)?;
    if m.version != MANIFEST_VERSION {
        return Err(IoError::ManifestSchemaError(format!(
            "unsupported manifest version {}, expected {MANIFEST_VERSION}",
            m.version
        )));
    }
    if !(m.fs > 0.0 && m.fs.is_finite()) {
        return Err(IoError::ManifestSchemaError(format!("invalid fs {}", m.fs)));
    }
    if m.entries.is_empty() {
        return Err(IoError::ManifestSchemaError("manifest has no entries".into()));
    }
    let bp = blob_path(manifest_path, &m.blob);
    let blob = std::fs::read(&bp).map_err(|e| IoError::at(&bp, e))?;
    let record_bytes = (m.hrir_length * 4) as u64;
    let expected = m.entries.len() as u64 * record_bytes;
    if blob.len() as u64 != expected {
        return Err(IoError::BlobSizeMismatch {
            expected,
            got: blob.len() as u64,
        });
    }
    check_duplicates(
        m.entries
            .iter()
            .map(|e| (Direction::new(e.azimuth_deg, e.elevation_deg), e.ear)),
    )?;
    let mut records = Vec::with_capacity(m.entries.len());
    for (index, e) in m.entries.iter().enumerate() {
        if e.offset % 4 != 0 || e.offset + record_bytes > expected {
            return Err(IoError::ManifestSchemaError(format!(
                "entry {index}: offset {} outside blob of {expected} bytes or misaligned",
                e.offset
            )));
        }
        let start = e.offset as usize;
        let samples = blob[start..start + record_bytes as usize]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let rec = HrirRecord::new(samples, m.fs)
            .map_err(|source| IoError::InvalidRecord { index, source })?
            .with_direction(Direction::new(e.azimuth_deg, e.elevation_deg))
            .with_ear(e.ear)
            .with_coordinates(m.coordinate_system);
        records.push(rec);
    }
    let warnings = m
        .preset
        .map(|p| p.check(m.fs, m.hrir_length, &records))
        .unwrap_or_default();
    Ok(Dataset {
        name: m.name,
        fs: m.fs,
        hrir_length: m.hrir_length,
        coordinate_system: m.coordinate_system,
        preset: m.preset,
        records,
        warnings,
    })
}

/// Writes a canonical manifest (sequential offsets) and a `<stem>.f32` blob
/// next to it. Samples are stored as float32.
pub fn save_dataset(ds: &Dataset, manifest_path: impl AsRef<Path>) -> Result<(), IoError> {
    let manifest_path = manifest_path.as_ref();
    let stem = manifest_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset");
    let blob_name = format!("{stem}.f32");
    let record_bytes = (ds.hrir_length * 4) as u64;
    let mut blob = Vec::with_capacity(ds.records.len() * ds.hrir_length * 4);
    let mut entries = Vec::with_capacity(ds.records.len());
    for (i, r) in ds.records.iter().enumerate() {
        for &v in r.samples() {
            blob.extend_from_slice(&(v as f32).to_le_bytes());
        }
        entries.push(ManifestEntry {
            azimuth_deg: r.direction.azimuth_deg,
            elevation_deg: r.direction.elevation_deg,
            ear: r.ear,
            offset: i as u64 * record_bytes,
        });
    }
    let m = DatasetManifest {
        version: MANIFEST_VERSION,
        name: ds.name.clone(),
        fs: ds.fs,
        hrir_length: ds.hrir_length,
        coordinate_system: ds.coordinate_system,
        preset: ds.preset,
        blob: blob_name.clone(),
        entries,
    };
    let mut text = serde_json::to_string_pretty(&m).map_err(|e| IoError::FormatError(e.to_string()))?;
    text.push('\n');
    let bp = blob_path(manifest_path, &blob_name);
    std::fs::write(&bp, &blob).map_err(|e| IoError::at(&bp, e))?;
    std::fs::write(manifest_path, text).map_err(|e| IoError::at(manifest_path, e))?;
    Ok(())
}
