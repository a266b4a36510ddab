use std::io::Write;
use std::path::Path;

use hrtf_core::dsp::{CoordinateSystem, Ear, HrirRecord};
use hrtf_core::io::{self, wav, IoError, Table};

use crate::args::SelectArgs;
use crate::CliError;

pub struct Selection {
    pub coordinate_system: CoordinateSystem,
    pub records: Vec<HrirRecord>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

pub fn hrir_from_wav(path: &Path) -> Result<HrirRecord, CliError> {
    let audio = wav::read_wav(path)?;
    let samples = audio.channels.into_iter().next().unwrap_or_default();
    Ok(HrirRecord::new(samples, audio.fs as f64)?)
}

impl SelectArgs {
    pub fn select(&self) -> Result<Selection, CliError> {
        if let Some(p) = &self.source.wav {
            return Ok(Selection {
                coordinate_system: CoordinateSystem::InterauralPolar,
                records: vec![hrir_from_wav(p)?],
            });
        }
        let path = self.source.dataset.as_ref().expect("clap enforces one source");
        let ds = io::load_dataset(path)?;
        warn_all(&ds.warnings);
        let records: Vec<HrirRecord> = ds
            .records
            .into_iter()
            .filter(|r| self.ear.is_none_or(|e| r.ear == e))
            .filter(|r| self.azimuth.is_none_or(|a| same(r.direction.azimuth_deg, a)))
            .filter(|r| self.elevation.is_none_or(|e| same(r.direction.elevation_deg, e)))
            .collect();
        if records.is_empty() {
            return Err(CliError::NoMatchingRecords(format!(
                "no records in {} match the selection",
                path.display()
            )));
        }
        Ok(Selection {
            coordinate_system: ds.coordinate_system,
            records,
        })
    }
}

pub fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("hrtf-lab: warning: {w}");
    }
}

/// Writes to `out`, or to stdout when it is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| IoError::at(p, e))?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|source| IoError::Io { path: None, source })?;
        }
    }
    Ok(())
}

pub fn emit_table(out: Option<&Path>, t: &Table) -> Result<(), CliError> {
    emit(out, &t.to_csv_string())
}

/// One-line JSON summary on stdout.
pub fn summary(v: serde_json::Value) -> Result<(), CliError> {
    emit(None, &format!("{v}\n"))
}

pub fn ear_str(e: Ear) -> String {
    e.as_str().to_string()
}

pub fn cs_str(cs: CoordinateSystem) -> &'static str {
    match cs {
        CoordinateSystem::InterauralPolar => "interaural-polar",
        CoordinateSystem::VerticalPolar => "vertical-polar",
    }
}
