//! Model assembly: onset delay, pure-minimum-phase classification and the
//! minimum-phase / delay / all-pass reconstruction.
//!
//! A direction is *pure minimum phase* when its all-pass factor carries no
//! notch below the threshold; such directions are reproduced by `H_min`
//! and the onset delay alone. Every other direction gets one second-order
//! all-pass section designed from its deepest all-pass notch.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apf::{self, ApfDesign, ApfError, ApfSpec};
use crate::dsp::{self, fft, CoordinateSystem, Direction, DspError, Ear, HrirRecord, Spectrum};
use crate::fbs::{self, FbsConfig, FbsError};
use crate::io::binary::{expect_eof, expect_magic, read_f64, read_u32, write_f64, write_u32};
use crate::io::{angular_distance, fmt_f64, Circle, IoError, Table};
use crate::notch::{self, Notch, NotchConfig, NotchError, NotchSource};

/// Default fraction of the peak used by [`onset_delay`].
pub const ONSET_FRACTION: f64 = 0.2;
/// Largest cut-off energy fraction [`model_to_hrir`] accepts.
pub const MAX_TAIL_LOSS: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("NoAllpassNotchFound: direction ({az}, {el}) is outside the pure set but its all-pass factor has no notch", az = .0.azimuth_deg, el = .0.elevation_deg)]
    NoAllpassNotchFound(Direction),
    #[error("TailTruncationLoss: {lost:e} of the energy falls outside {n} samples")]
    TailTruncationLoss { lost: f64, n: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Notch(#[from] NotchError),
    #[error(transparent)]
    Apf(#[from] ApfError),
    #[error(transparent)]
    Fbs(#[from] FbsError),
}

/// First index with `|h[n]| >= fraction * max|h|`.
pub fn onset_delay_with(h: &[f64], fraction: f64) -> Result<usize, DspError> {
    let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(DspError::AllZeroInput);
    }
    Ok(h.iter()
        .position(|v| v.abs() >= fraction * peak)
        .expect("peak sample satisfies the threshold"))
}

pub fn onset_delay(h: &HrirRecord) -> Result<usize, DspError> {
    onset_delay_with(h.samples(), ONSET_FRACTION)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionClass {
    PureMinPhase,
    MinPhaseAllpass,
}

impl DirectionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionClass::PureMinPhase => "pure_min_phase",
            DirectionClass::MinPhaseAllpass => "min_phase_allpass",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub class: DirectionClass,
    /// Minimum of the oriented all-pass curve over valid bins, samples.
    pub min_ap_gd: f64,
    pub min_bin: Option<usize>,
}

/// Classifies by the minimum of the all-pass LP-GD curve over the valid
/// half-spectrum bins.
pub fn classify_direction(h: &HrirRecord, cfg: &NotchConfig) -> Result<Classification, ModelError> {
    let curve = notch::component_curve(h, NotchSource::AllPass, cfg)?;
    let mask = h.spectrum().valid_mask();
    let found = curve.masked_min(&mask);
    let (min_bin, min_ap_gd) = match found {
        Some((b, v)) => (Some(b), v),
        None => (None, 0.0),
    };
    let class = if min_ap_gd < cfg.threshold {
        DirectionClass::MinPhaseAllpass
    } else {
        DirectionClass::PureMinPhase
    };
    Ok(Classification {
        class,
        min_ap_gd,
        min_bin,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub direction: Direction,
    pub min_ap_gd: f64,
    pub is_pure: bool,
}

/// Directions classified on one or more circles; `pure_hrirs` holds the
/// HRIRs of the pure entries, in entry order.
#[derive(Clone, Debug, PartialEq)]
pub struct PureMinPhaseMap {
    pub coordinate_system: CoordinateSystem,
    pub threshold: f64,
    /// Angular spacing of the entries (degrees); used as the lookup radius.
    pub step_deg: f64,
    pub entries: Vec<MapEntry>,
    pub pure_hrirs: Vec<HrirRecord>,
}

impl PureMinPhaseMap {
    pub fn new(coordinate_system: CoordinateSystem, threshold: f64, step_deg: f64) -> Self {
        Self {
            coordinate_system,
            threshold,
            step_deg,
            entries: Vec::new(),
            pure_hrirs: Vec::new(),
        }
    }

    pub fn push(&mut self, direction: Direction, c: &Classification, hrir: &HrirRecord) {
        let is_pure = c.class == DirectionClass::PureMinPhase;
        self.entries.push(MapEntry {
            direction,
            min_ap_gd: c.min_ap_gd,
            is_pure,
        });
        if is_pure {
            self.pure_hrirs.push(hrir.clone());
        }
    }

    /// Appends the entries of another map on the same coordinates.
    pub fn merge(&mut self, other: PureMinPhaseMap) {
        self.entries.extend(other.entries);
        self.pure_hrirs.extend(other.pure_hrirs);
    }

    pub fn pure_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_pure).count()
    }

    /// Nearest entry within half a step.
    pub fn lookup(&self, d: Direction) -> Option<&MapEntry> {
        let radius = (0.5 * self.step_deg).to_radians() + 1e-9;
        self.entries
            .iter()
            .map(|e| (angular_distance(e.direction, d, self.coordinate_system), e))
            .filter(|(dist, _)| *dist <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, e)| e)
    }

    /// Whether `d` belongs to the pure set.
    pub fn contains(&self, d: Direction) -> bool {
        self.lookup(d).is_some_and(|e| e.is_pure)
    }

    /// `azimuth_deg,elevation_deg,min_ap_gd_samples,is_pure`
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["azimuth_deg", "elevation_deg", "min_ap_gd_samples", "is_pure"]);
        for e in &self.entries {
            t.push(vec![
                fmt_f64(e.direction.azimuth_deg),
                fmt_f64(e.direction.elevation_deg),
                fmt_f64(e.min_ap_gd),
                e.is_pure.to_string(),
            ]);
        }
        t
    }
}

pub const MAP_MAGIC: &[u8; 4] = b"PMPM";
pub const MAP_VERSION: u32 = 1;

/// Binary layout, little-endian: magic `PMPM`, u32 version, u32 coordinate
/// system (0 interaural-polar, 1 vertical-polar), f64 threshold, f64 step,
/// u32 entry count, then per entry f64 azimuth, f64 elevation, f64 minimum
/// all-pass delay, u32 is_pure; then u32 HRIR length, f64 fs and the pure
/// HRIRs as f64 samples (ear as u32, 0 left) in entry order.
pub fn write_map<W: Write>(map: &PureMinPhaseMap, mut w: W) -> Result<(), IoError> {
    w.write_all(MAP_MAGIC)?;
    write_u32(&mut w, MAP_VERSION)?;
    write_u32(
        &mut w,
        match map.coordinate_system {
            CoordinateSystem::InterauralPolar => 0,
            CoordinateSystem::VerticalPolar => 1,
        },
    )?;
    write_f64(&mut w, map.threshold)?;
    write_f64(&mut w, map.step_deg)?;
    write_u32(&mut w, map.entries.len() as u32)?;
    for e in &map.entries {
        write_f64(&mut w, e.direction.azimuth_deg)?;
        write_f64(&mut w, e.direction.elevation_deg)?;
        write_f64(&mut w, e.min_ap_gd)?;
        write_u32(&mut w, e.is_pure as u32)?;
    }
    let (len, fs) = map
        .pure_hrirs
        .first()
        .map_or((0, 0.0), |h| (h.len(), h.fs()));
    write_u32(&mut w, len as u32)?;
    write_f64(&mut w, fs)?;
    for h in &map.pure_hrirs {
        if h.len() != len {
            return Err(IoError::FormatError("pure HRIRs differ in length".into()));
        }
        write_u32(&mut w, (h.ear == Ear::Right) as u32)?;
        for &v in h.samples() {
            write_f64(&mut w, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_map<R: Read>(mut r: R) -> Result<PureMinPhaseMap, IoError> {
    expect_magic(&mut r, MAP_MAGIC)?;
    let version = read_u32(&mut r)?;
    if version != MAP_VERSION {
        return Err(IoError::FormatError(format!("unsupported PMPM version {version}")));
    }
    let coordinate_system = match read_u32(&mut r)? {
        0 => CoordinateSystem::InterauralPolar,
        1 => CoordinateSystem::VerticalPolar,
        other => return Err(IoError::FormatError(format!("unknown coordinate system {other}"))),
    };
    let threshold = read_f64(&mut r)?;
    let step_deg = read_f64(&mut r)?;
    let n = read_u32(&mut r)? as usize;
    let mut map = PureMinPhaseMap::new(coordinate_system, threshold, step_deg);
    for _ in 0..n {
        let az = read_f64(&mut r)?;
        let el = read_f64(&mut r)?;
        let min_ap_gd = read_f64(&mut r)?;
        let is_pure = read_u32(&mut r)? != 0;
        map.entries.push(MapEntry {
            direction: Direction::new(az, el),
            min_ap_gd,
            is_pure,
        });
    }
    let len = read_u32(&mut r)? as usize;
    let fs = read_f64(&mut r)?;
    let pure: Vec<Direction> = map.entries.iter().filter(|e| e.is_pure).map(|e| e.direction).collect();
    for d in pure {
        let ear = if read_u32(&mut r)? == 0 { Ear::Left } else { Ear::Right };
        let samples = (0..len).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>, _>>()?;
        let h = HrirRecord::new(samples, fs)
            .map_err(|e| IoError::FormatError(e.to_string()))?
            .with_direction(d)
            .with_ear(ear)
            .with_coordinates(coordinate_system);
        map.pure_hrirs.push(h);
    }
    expect_eof(&mut r)?;
    Ok(map)
}

pub fn save_map(map: &PureMinPhaseMap, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| IoError::at(path, e))?;
    write_map(map, std::io::BufWriter::new(f))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<PureMinPhaseMap, IoError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| IoError::at(path, e))?;
    read_map(std::io::BufReader::new(f))
}

/// Classifies each record directly, without interpolation.
pub fn classify_records(
    records: &[HrirRecord],
    cs: CoordinateSystem,
    cfg: &NotchConfig,
    step_deg: f64,
) -> Result<PureMinPhaseMap, ModelError> {
    let classes = records
        .par_iter()
        .map(|h| classify_direction(h, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut map = PureMinPhaseMap::new(cs, cfg.threshold, step_deg);
    for (h, c) in records.iter().zip(&classes) {
        map.push(h.direction, c, h);
    }
    Ok(map)
}

/// Radial side of the interpolation used by [`build_pure_map`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepRadial {
    /// Angular series at every bin (a radial basis spanning all bins).
    #[default]
    Complete,
    /// Truncated Bessel series from the sweep's [`FbsConfig`].
    Bessel,
}

impl std::str::FromStr for SweepRadial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complete" => Ok(SweepRadial::Complete),
            "bessel" => Ok(SweepRadial::Bessel),
            other => Err(format!("unknown radial basis '{other}' (complete, bessel)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub step_deg: f64,
    pub notch: NotchConfig,
    pub fbs: FbsConfig,
    pub radial: SweepRadial,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            step_deg: 1.0,
            notch: NotchConfig::default(),
            fbs: FbsConfig::default(),
            radial: SweepRadial::default(),
        }
    }
}

/// Interpolates the circle, reconstructs an HRIR every `step_deg` from 0 up
/// to (not including) 360 degrees and classifies each.
///
/// The classification reads group delay to a fraction of a sample, so the
/// default interpolates each bin's angular series directly; a truncated
/// Bessel series puts errors of about a sample into the all-pass curve and
/// its basis forces a zero at `f_max`.
pub fn build_pure_map(circle: &Circle, cs: CoordinateSystem, cfg: &SweepConfig) -> Result<PureMinPhaseMap, ModelError> {
    if !(cfg.step_deg > 0.0 && cfg.step_deg <= 360.0) {
        return Err(ModelError::InvalidConfig(format!("step must be in (0, 360], got {}", cfg.step_deg)));
    }
    let eval = match cfg.radial {
        SweepRadial::Complete => fbs::angular_series(&circle.records, &circle.thetas, cfg.fbs.m_max)?,
        SweepRadial::Bessel => {
            let n = circle.records.first().map_or(0, |r| r.len());
            fbs::fbs_fit(&circle.records, &circle.thetas, &cfg.fbs)?.evaluator(n)?
        }
    };
    let count = (360.0 / cfg.step_deg - 1e-9).ceil() as usize;
    let results = (0..count)
        .into_par_iter()
        .map(|i| {
            let theta = (i as f64 * cfg.step_deg).to_radians();
            let d = circle.plane.direction_at(theta, cs);
            let h = eval
                .record(theta)?
                .with_direction(d)
                .with_ear(circle.ear)
                .with_coordinates(cs);
            let c = classify_direction(&h, &cfg.notch)?;
            Ok((d, c, h))
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let mut map = PureMinPhaseMap::new(cs, cfg.notch.threshold, cfg.step_deg);
    for (d, c, h) in &results {
        map.push(*d, c, h);
    }
    Ok(map)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionMode {
    MHrtf,
    MinPd,
}

impl std::str::FromStr for ReconstructionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "m-hrtf" | "mhrtf" => Ok(ReconstructionMode::MHrtf),
            "min-pd" | "minpd" => Ok(ReconstructionMode::MinPd),
            other => Err(format!("unknown mode '{other}' (m-hrtf, min-pd)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    PureMinPhase,
    MinPhaseAllpass,
    MinPdBaseline,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::PureMinPhase => "pure_min_phase",
            Flavor::MinPhaseAllpass => "min_phase_allpass",
            Flavor::MinPdBaseline => "min_pd_baseline",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub notch: NotchConfig,
    pub design: ApfDesign,
    pub onset_fraction: f64,
    /// All-pass impulse responses are cut below this fraction of their peak.
    pub tail_rel: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            notch: NotchConfig::default(),
            design: ApfDesign::default(),
            onset_fraction: ONSET_FRACTION,
            tail_rel: apf::DEFAULT_TAIL_REL,
        }
    }
}

/// `H_r = H_min e^{-j w t_d} [H_apf]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionModel {
    pub direction: Direction,
    pub ear: Ear,
    pub min_phase: Spectrum,
    pub t_d: usize,
    pub apf: Option<ApfSpec>,
    pub flavor: Flavor,
    /// All-pass notches beyond the one the filter models.
    pub extra_notches: Vec<Notch>,
}

impl ReconstructionModel {
    pub fn fs(&self) -> f64 {
        self.min_phase.fs
    }

    /// `H_r` on the model's own DFT grid, with the all-pass section exact.
    pub fn spectrum(&self) -> Spectrum {
        let n = self.min_phase.len();
        let bins = self
            .min_phase
            .bins
            .iter()
            .enumerate()
            .map(|(i, &hm)| {
                let w = 2.0 * PI * i as f64 / n as f64;
                let mut v = hm * Complex64::from_polar(1.0, -w * self.t_d as f64);
                if let Some(s) = &self.apf {
                    v *= apf::apf_transfer(s, w);
                }
                v
            })
            .collect();
        Spectrum::new(bins, self.fs())
    }
}

/// Builds `H_r` for `h`. `in_pure_set` says whether the direction belongs to
/// the pure set; it is ignored in `MinPd` mode.
pub fn reconstruct_with(
    h: &HrirRecord,
    in_pure_set: bool,
    mode: ReconstructionMode,
    cfg: &ModelConfig,
) -> Result<ReconstructionModel, ModelError> {
    let min_phase = dsp::minimum_phase(h)?;
    let t_d = onset_delay_with(h.samples(), cfg.onset_fraction)?;
    let mut model = ReconstructionModel {
        direction: h.direction,
        ear: h.ear,
        min_phase,
        t_d,
        apf: None,
        flavor: Flavor::MinPdBaseline,
        extra_notches: Vec::new(),
    };
    if mode == ReconstructionMode::MinPd {
        return Ok(model);
    }
    if in_pure_set {
        model.flavor = Flavor::PureMinPhase;
        return Ok(model);
    }
    let mut notches = notch::record_notches(h, NotchSource::AllPass, &cfg.notch)?;
    if notches.is_empty() {
        return Err(ModelError::NoAllpassNotchFound(h.direction));
    }
    // Deepest first; equal depths keep the lower frequency.
    let best = notches
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.depth.total_cmp(&b.1.depth).then(a.1.frequency_hz.total_cmp(&b.1.frequency_hz)))
        .map(|(i, _)| i)
        .expect("nonempty");
    let chosen = notches.remove(best);
    model.apf = Some(apf::apf_from_notch_with(&chosen, h.fs(), &cfg.design)?);
    model.flavor = Flavor::MinPhaseAllpass;
    model.extra_notches = notches;
    Ok(model)
}

/// Looks the direction up in `map` and builds `H_r`.
pub fn reconstruct(
    h: &HrirRecord,
    map: &PureMinPhaseMap,
    mode: ReconstructionMode,
    cfg: &ModelConfig,
) -> Result<ReconstructionModel, ModelError> {
    reconstruct_with(h, map.contains(h.direction), mode, cfg)
}

/// Time-domain HRIR of length `n`: the minimum-phase IR, delayed by `t_d`
/// and convolved with the truncated all-pass IR.
pub fn model_to_hrir_with(model: &ReconstructionModel, n: usize, tail_rel: f64) -> Result<HrirRecord, ModelError> {
    let h_min = fft::irfft(&model.min_phase.bins);
    let mut delayed = vec![0.0; model.t_d];
    delayed.extend_from_slice(&h_min);
    let (full, cut_bound) = match &model.apf {
        None => (delayed, 0.0),
        Some(s) => {
            let ir = apf::impulse_response(s, tail_rel);
            (fft::convolve(&delayed, &ir.taps), ir.tail_energy_bound)
        }
    };
    let total: f64 = full.iter().map(|v| v * v).sum();
    let kept: f64 = full.iter().take(n).map(|v| v * v).sum();
    let lost = if total > 0.0 { (total - kept) / total } else { 0.0 } + cut_bound;
    if lost > MAX_TAIL_LOSS {
        return Err(ModelError::TailTruncationLoss { lost, n });
    }
    let mut out = full;
    out.resize(n, 0.0);
    let rec = HrirRecord::new(out, model.fs())?
        .with_direction(model.direction)
        .with_ear(model.ear);
    Ok(rec)
}

pub fn model_to_hrir(model: &ReconstructionModel, n: usize) -> Result<HrirRecord, ModelError> {
    model_to_hrir_with(model, n, apf::DEFAULT_TAIL_REL)
}
