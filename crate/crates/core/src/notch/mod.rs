//! LP-GD pinna-spectral-notch extraction.
//!
//! The pipeline takes the biased autocorrelation of the input, tapers its
//! causal half with a half-Hann window, runs Levinson-Durbin on it, inverse
//! filters the input by the resulting LP polynomial and returns the group
//! delay of that residual. Notches are the local minima of the curve that
//! fall below a (negative) threshold.
//!
//! All-pass analysis uses the excess group delay of the all-pass factor about
//! its integer linear-phase baseline, oriented so that phase transitions show
//! up as dips: `d - tau_ap`. A pure delay gives an identically zero curve, and
//! a second-order all-pass section with pole radius `r` at `theta0` gives a
//! dip of depth `2 - tau(theta0)`.

pub mod lpc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{
    self, group_delay, linear_phase_delay, Direction, DspError, GroupDelayCurve, HrirRecord,
};
use crate::io::table::{fmt_f64, Table};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NotchError {
    #[error("SingularToeplitz: nonpositive prediction-error variance at stage {stage}")]
    SingularToeplitz { stage: usize },
    #[error("TooShort: {len} samples, at least {min} required")]
    TooShort { len: usize, min: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("NonpositiveFrequency: {0} Hz")]
    NonpositiveFrequency(f64),
    #[error("MixedPlane: {0}")]
    MixedPlane(String),
    #[error("at azimuth {az} deg, elevation {el} deg: {source}", az = .direction.azimuth_deg, el = .direction.elevation_deg)]
    AtDirection {
        direction: Direction,
        #[source]
        source: Box<NotchError>,
    },
    #[error(transparent)]
    Dsp(#[from] DspError),
}

/// Which factor of the decomposition a notch was measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotchSource {
    Composite,
    MinPhase,
    AllPass,
}

impl NotchSource {
    pub fn as_str(self) -> &'static str {
        match self {
            NotchSource::Composite => "composite",
            NotchSource::MinPhase => "min_phase",
            NotchSource::AllPass => "all_pass",
        }
    }
}

impl std::str::FromStr for NotchSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "composite" => Ok(NotchSource::Composite),
            "min_phase" | "minimum_phase" | "min" => Ok(NotchSource::MinPhase),
            "all_pass" | "allpass" | "ap" => Ok(NotchSource::AllPass),
            other => Err(format!("unknown notch source '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Notch {
    pub frequency_hz: f64,
    /// Group delay at the minimum, in samples (negative).
    pub depth: f64,
    pub bin_index: usize,
    pub source: NotchSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotchConfig {
    /// Group-delay threshold in samples; must be negative.
    pub threshold: f64,
    pub lp_order: usize,
    /// Half-Hann taper length; `None` uses the input length.
    pub window_len: Option<usize>,
    pub min_separation_hz: f64,
}

impl Default for NotchConfig {
    fn default() -> Self {
        Self {
            threshold: -0.8,
            lp_order: 12,
            window_len: None,
            min_separation_hz: 500.0,
        }
    }
}

impl NotchConfig {
    pub fn validate(&self) -> Result<(), NotchError> {
        if !(self.threshold < 0.0) {
            return Err(NotchError::InvalidConfig(format!(
                "threshold must be negative, got {}",
                self.threshold
            )));
        }
        if self.lp_order < 2 {
            return Err(NotchError::InvalidConfig(format!(
                "lp_order must be >= 2, got {}",
                self.lp_order
            )));
        }
        if !(self.min_separation_hz > 0.0) {
            return Err(NotchError::InvalidConfig(format!(
                "min_separation must be positive, got {}",
                self.min_separation_hz
            )));
        }
        if self.window_len == Some(0) {
            return Err(NotchError::InvalidConfig("window length must be positive".into()));
        }
        Ok(())
    }
}

/// LP-GD curve of `h`: group delay of the LP residual.
pub fn lpgd_spectrum(h: &[f64], fs: f64, cfg: &NotchConfig) -> Result<GroupDelayCurve, NotchError> {
    cfg.validate()?;
    let min = 2 * cfg.lp_order;
    if h.len() < min {
        return Err(NotchError::TooShort { len: h.len(), min });
    }
    let mut r = lpc::autocorrelation(h);
    let w = lpc::half_hann(cfg.window_len.unwrap_or(h.len()));
    for (k, v) in r.iter_mut().enumerate() {
        *v *= w.get(k).copied().unwrap_or(0.0);
    }
    let (a, _) = lpc::levinson_durbin(&r, cfg.lp_order)?;
    let e = lpc::residual(h, &a);
    Ok(group_delay(&e, fs)?)
}

/// Local minima of `curve` below the threshold on the half spectrum,
/// deduplicated greedily (deepest first) to `min_separation_hz` and returned
/// in ascending frequency.
pub fn extract_notches(curve: &GroupDelayCurve, cfg: &NotchConfig, source: NotchSource) -> Vec<Notch> {
    let v = &curve.values;
    let n = v.len();
    if n < 3 {
        return Vec::new();
    }
    let last = curve.last_interior_bin();
    let mut candidates = Vec::new();
    let mut i = 1;
    while i <= last {
        let val = v[i];
        if !val.is_finite() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < last && v[j + 1] == val {
            j += 1;
        }
        let left = v[i - 1];
        let right = v[j + 1];
        if left.is_finite() && right.is_finite() && left > val && right > val && val < cfg.threshold {
            candidates.push(Notch {
                frequency_hz: curve.freq(i),
                depth: val,
                bin_index: i,
                source,
            });
        }
        i = j + 1;
    }
    candidates.sort_by(|a, b| {
        a.depth
            .total_cmp(&b.depth)
            .then(a.frequency_hz.total_cmp(&b.frequency_hz))
    });
    let mut kept: Vec<Notch> = Vec::new();
    for c in candidates {
        if kept
            .iter()
            .all(|k| (k.frequency_hz - c.frequency_hz).abs() >= cfg.min_separation_hz)
        {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    kept
}

/// Oriented excess group delay of an all-pass factor, `d - tau_lpgd(h_ap)`.
pub fn all_pass_curve(all_pass: &dsp::Spectrum, cfg: &NotchConfig) -> Result<GroupDelayCurve, NotchError> {
    let d = linear_phase_delay(all_pass) as f64;
    let h_ap = all_pass.to_real_sequence();
    let tau = lpgd_spectrum(&h_ap, all_pass.fs, cfg)?;
    Ok(GroupDelayCurve::new(tau.values.into_iter().map(|t| d - t).collect(), tau.fs))
}

/// LP-GD curve of the selected decomposition factor of `h`.
pub fn component_curve(h: &HrirRecord, source: NotchSource, cfg: &NotchConfig) -> Result<GroupDelayCurve, NotchError> {
    match source {
        NotchSource::Composite => lpgd_spectrum(h.samples(), h.fs(), cfg),
        NotchSource::MinPhase => {
            let m = dsp::minimum_phase(h)?;
            lpgd_spectrum(&m.to_real_sequence(), h.fs(), cfg)
        }
        NotchSource::AllPass => {
            let m = dsp::minimum_phase(h)?;
            let ap = dsp::all_pass_component(h, &m)?;
            all_pass_curve(&ap, cfg)
        }
    }
}

/// Notches of one decomposition factor of `h`.
pub fn record_notches(h: &HrirRecord, source: NotchSource, cfg: &NotchConfig) -> Result<Vec<Notch>, NotchError> {
    let curve = component_curve(h, source, cfg)?;
    Ok(extract_notches(&curve, cfg, source))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub elevation_deg: f64,
    pub notches: Vec<Notch>,
}

/// Per-elevation notches for records sharing one azimuth and sampling rate;
/// rows are sorted by elevation.
pub fn notch_trajectory(
    records: &[HrirRecord],
    cfg: &NotchConfig,
    source: NotchSource,
) -> Result<Vec<TrajectoryRow>, NotchError> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    for r in records {
        if r.direction.azimuth_deg != first.direction.azimuth_deg {
            return Err(NotchError::MixedPlane(format!(
                "azimuth {} differs from {}",
                r.direction.azimuth_deg, first.direction.azimuth_deg
            )));
        }
        if r.fs() != first.fs() {
            return Err(NotchError::MixedPlane(format!(
                "sampling rate {} differs from {}",
                r.fs(),
                first.fs()
            )));
        }
    }
    let mut rows = records
        .iter()
        .map(|r| {
            record_notches(r, source, cfg)
                .map(|notches| TrajectoryRow {
                    elevation_deg: r.direction.elevation_deg,
                    notches,
                })
                .map_err(|e| NotchError::AtDirection {
                    direction: r.direction,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| a.elevation_deg.total_cmp(&b.elevation_deg));
    Ok(rows)
}

/// `elevation_deg,source,notch_freq_hz,depth_samples`, one row per notch.
pub fn trajectory_table(rows: &[TrajectoryRow]) -> Table {
    let mut t = Table::new(["elevation_deg", "source", "notch_freq_hz", "depth_samples"]);
    for row in rows {
        for n in &row.notches {
            t.push(vec![
                fmt_f64(row.elevation_deg),
                n.source.as_str().to_string(),
                fmt_f64(n.frequency_hz),
                fmt_f64(n.depth),
            ]);
        }
    }
    t
}

/// Two-ray reflection distance `c / (2 f)`.
pub fn notch_to_distance(f_notch_hz: f64, speed_of_sound: f64) -> Result<f64, NotchError> {
    if !(f_notch_hz > 0.0) {
        return Err(NotchError::NonpositiveFrequency(f_notch_hz));
    }
    Ok(speed_of_sound / (2.0 * f_notch_hz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_with(values: Vec<f64>) -> GroupDelayCurve {
        GroupDelayCurve::new(values, 44100.0)
    }

    #[test]
    fn flat_curve_has_no_notches() {
        let c = curve_with(vec![0.0; 64]);
        assert!(extract_notches(&c, &NotchConfig::default(), NotchSource::Composite).is_empty());
    }

    #[test]
    fn single_dip() {
        let mut v = vec![0.0; 64];
        v[10] = -1.5;
        let n = extract_notches(&curve_with(v), &NotchConfig::default(), NotchSource::Composite);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].bin_index, 10);
        assert_eq!(n[0].depth, -1.5);
        assert!((n[0].frequency_hz - 10.0 * 44100.0 / 64.0).abs() < 1e-9);
    }

    #[test]
    fn close_dips_keep_the_deeper() {
        // bin spacing is 44100/256 = 172 Hz; bins 20 and 22 are 344 Hz apart.
        let mut v = vec![0.0; 256];
        v[20] = -1.0;
        v[22] = -2.0;
        let n = extract_notches(&curve_with(v.clone()), &NotchConfig::default(), NotchSource::Composite);
        // Brute force: every pair of sub-threshold minima closer than 500 Hz
        // keeps only its deepest member.
        let minima: Vec<usize> = (1..128).filter(|&i| v[i] < v[i - 1] && v[i] < v[i + 1] && v[i] < -0.8).collect();
        assert_eq!(minima, vec![20, 22]);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].bin_index, 22);
        assert_eq!(n[0].depth, -2.0);
    }

    #[test]
    fn plateau_minimum_takes_lowest_bin() {
        let mut v = vec![0.0; 64];
        v[12] = -2.0;
        v[13] = -2.0;
        v[14] = -2.0;
        let n = extract_notches(&curve_with(v), &NotchConfig::default(), NotchSource::MinPhase);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].bin_index, 12);
        assert_eq!(n[0].source, NotchSource::MinPhase);
    }

    #[test]
    fn shallow_dip_ignored() {
        let mut v = vec![0.0; 64];
        v[10] = -0.5;
        assert!(extract_notches(&curve_with(v), &NotchConfig::default(), NotchSource::Composite).is_empty());
    }

    #[test]
    fn impulse_curve_is_zero() {
        let mut h = vec![0.0; 64];
        h[0] = 1.0;
        let c = lpgd_spectrum(&h, 44100.0, &NotchConfig::default()).unwrap();
        assert!(c.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn all_zero_input_is_singular() {
        let err = lpgd_spectrum(&[0.0; 64], 44100.0, &NotchConfig::default()).unwrap_err();
        assert_eq!(err, NotchError::SingularToeplitz { stage: 0 });
    }

    #[test]
    fn short_input_rejected() {
        let err = lpgd_spectrum(&[1.0; 10], 44100.0, &NotchConfig::default()).unwrap_err();
        assert_eq!(err, NotchError::TooShort { len: 10, min: 24 });
    }

    #[test]
    fn config_validation() {
        let bad = NotchConfig {
            threshold: 0.5,
            ..NotchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = NotchConfig {
            lp_order: 1,
            ..NotchConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = NotchConfig {
            min_separation_hz: 0.0,
            ..NotchConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn distance() {
        assert!((notch_to_distance(8575.0, 343.0).unwrap() - 0.02).abs() < 1e-15);
        assert!((notch_to_distance(6991.0, 343.0).unwrap() - 0.024531540552138464).abs() < 1e-15);
        assert!(notch_to_distance(1e9, 343.0).unwrap() < notch_to_distance(1e8, 343.0).unwrap());
        assert_eq!(
            notch_to_distance(0.0, 343.0).unwrap_err(),
            NotchError::NonpositiveFrequency(0.0)
        );
    }

    #[test]
    fn empty_trajectory_table_is_header_only() {
        assert_eq!(
            trajectory_table(&[]).to_csv_string(),
            "elevation_deg,source,notch_freq_hz,depth_samples\n"
        );
    }
}
