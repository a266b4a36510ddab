//! Spectral primitives: DFT helpers, complex cepstrum, minimum-phase /
//! all-pass decomposition and group delay.
//!
//! Internally every index is 0-based; the cepstral folding rule keeps the
//! first coefficient (and the Nyquist coefficient for even lengths), adds the
//! mirrored non-causal half onto the causal half and zeroes the rest.

mod cepstrum;
pub mod fft;
mod group_delay;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cepstrum::{
    all_pass_component, complex_cepstrum, decompose, fold_cepstrum, linear_phase_delay,
    minimum_phase, unwrap_phase,
};
pub use group_delay::{group_delay, group_delay_from_spectrum};

/// Bins below this fraction of the peak magnitude make the log undefined.
pub const ZERO_BIN_REL: f64 = 1e-12;
/// Magnitude floor applied before the log, relative to the peak magnitude.
pub const SPECTRAL_FLOOR_REL: f64 = 1e-10;
/// Bins below this fraction of the peak magnitude are excluded from checks.
pub const VALID_MASK_REL: f64 = 1e-3;
/// Minimum HRIR length accepted by [`HrirRecord::new`].
pub const MIN_HRIR_LEN: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("ZeroSpectrumBin: |H| at bin {bin} is below 1e-12 of the peak; the log spectrum is undefined")]
    ZeroSpectrumBin { bin: usize },
    #[error("DivisionUnderflow: minimum-phase magnitude at bin {bin} is below the floor")]
    DivisionUnderflow { bin: usize },
    #[error("LengthMismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("TooShort: HRIR has {len} samples, at least {min} required")]
    TooShort { len: usize, min: usize },
    #[error("InvalidSampleRate: {0} Hz")]
    InvalidSampleRate(f64),
    #[error("AllZeroInput: sequence has no nonzero sample")]
    AllZeroInput,
    #[error("EmptyInput")]
    EmptyInput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ear {
    Left,
    Right,
}

impl Ear {
    pub fn as_str(self) -> &'static str {
        match self {
            Ear::Left => "left",
            Ear::Right => "right",
        }
    }
}

impl std::str::FromStr for Ear {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Ear::Left),
            "right" | "r" => Ok(Ear::Right),
            other => Err(format!("unknown ear '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordinateSystem {
    InterauralPolar,
    VerticalPolar,
}

impl std::str::FromStr for CoordinateSystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "interaural-polar" | "interaural" => Ok(CoordinateSystem::InterauralPolar),
            "vertical-polar" | "vertical" => Ok(CoordinateSystem::VerticalPolar),
            other => Err(format!("unknown coordinate system '{other}' (interaural-polar, vertical-polar)")),
        }
    }
}

/// Source direction in degrees. The meaning of the two angles depends on the
/// record's [`CoordinateSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self {
            azimuth_deg,
            elevation_deg,
        }
    }
}

/// One measured head-related impulse response.
#[derive(Clone, Debug, PartialEq)]
pub struct HrirRecord {
    samples: Vec<f64>,
    fs: f64,
    pub direction: Direction,
    pub ear: Ear,
    pub coordinate_system: CoordinateSystem,
}

impl HrirRecord {
    /// Validates `N >= 8`, `fs > 0` and at least one nonzero sample.
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self, DspError> {
        if samples.len() < MIN_HRIR_LEN {
            return Err(DspError::TooShort {
                len: samples.len(),
                min: MIN_HRIR_LEN,
            });
        }
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(DspError::InvalidSampleRate(fs));
        }
        if samples.iter().all(|&v| v == 0.0) {
            return Err(DspError::AllZeroInput);
        }
        Ok(Self {
            samples,
            fs,
            direction: Direction::default(),
            ear: Ear::Left,
            coordinate_system: CoordinateSystem::InterauralPolar,
        })
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_ear(mut self, ear: Ear) -> Self {
        self.ear = ear;
        self
    }

    pub fn with_coordinates(mut self, cs: CoordinateSystem) -> Self {
        self.coordinate_system = cs;
        self
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Copy of the record zero-padded to `nfft` samples (no-op when shorter).
    pub fn zero_padded(&self, nfft: usize) -> Self {
        let mut out = self.clone();
        if nfft > out.samples.len() {
            out.samples.resize(nfft, 0.0);
        }
        out
    }

    /// Same metadata, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self, DspError> {
        let mut out = HrirRecord::new(samples, self.fs)?;
        out.direction = self.direction;
        out.ear = self.ear;
        out.coordinate_system = self.coordinate_system;
        Ok(out)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_real(&self.samples, self.fs)
    }
}

/// Complex spectrum on the grid `f_i = i * fs / N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    pub fs: f64,
}

impl Spectrum {
    pub fn new(bins: Vec<Complex64>, fs: f64) -> Self {
        Self { bins, fs }
    }

    pub fn from_real(x: &[f64], fs: f64) -> Self {
        Self {
            bins: fft::rfft(x),
            fs,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn freq(&self, i: usize) -> f64 {
        i as f64 * self.fs / self.bins.len() as f64
    }

    pub fn max_magnitude(&self) -> f64 {
        self.bins.iter().map(|b| b.norm()).fold(0.0, f64::max)
    }

    /// `true` where `|bin| >= VALID_MASK_REL * max|bin|`.
    pub fn valid_mask(&self) -> Vec<bool> {
        let thr = VALID_MASK_REL * self.max_magnitude();
        self.bins.iter().map(|b| b.norm() >= thr).collect()
    }

    /// Inverse transform, real part.
    pub fn to_real_sequence(&self) -> Vec<f64> {
        fft::irfft(&self.bins)
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.bins.iter().map(|b| 20.0 * b.norm().max(1e-300).log10()).collect()
    }

    /// Largest deviation `max_i |bins[i] - conj(bins[N-i])|`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.bins.len();
        (1..n)
            .map(|i| (self.bins[i] - self.bins[n - i].conj()).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Mul for &Spectrum {
    type Output = Spectrum;

    fn mul(self, rhs: &Spectrum) -> Spectrum {
        assert_eq!(self.len(), rhs.len(), "spectrum length mismatch");
        Spectrum {
            bins: self.bins.iter().zip(&rhs.bins).map(|(a, b)| a * b).collect(),
            fs: self.fs,
        }
    }
}

/// Group delay in samples over the same frequency grid as a [`Spectrum`].
/// Bins where the denominator vanished carry `NaN`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupDelayCurve {
    pub values: Vec<f64>,
    pub fs: f64,
}

impl GroupDelayCurve {
    pub fn new(values: Vec<f64>, fs: f64) -> Self {
        Self { values, fs }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn freq(&self, i: usize) -> f64 {
        i as f64 * self.fs / self.values.len() as f64
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.values[i].is_finite()
    }

    /// Index of the largest half-spectrum bin strictly below Nyquist.
    pub fn last_interior_bin(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    /// Minimum over half-spectrum bins `0..=N/2` where `mask` is set and the
    /// value is finite.
    pub fn masked_min(&self, mask: &[bool]) -> Option<(usize, f64)> {
        let half = self.values.len() / 2;
        (0..=half)
            .filter(|&i| mask.get(i).copied().unwrap_or(false) && self.values[i].is_finite())
            .map(|i| (i, self.values[i]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

impl std::ops::Sub<f64> for GroupDelayCurve {
    type Output = GroupDelayCurve;

    fn sub(mut self, rhs: f64) -> GroupDelayCurve {
        for v in &mut self.values {
            *v -= rhs;
        }
        self
    }
}

/// Composite spectrum with its minimum-phase and all-pass factors.
#[derive(Clone, Debug)]
pub struct DecomposedHrtf {
    pub composite: Spectrum,
    pub min_phase: Spectrum,
    pub all_pass: Spectrum,
    pub gd_composite: GroupDelayCurve,
    pub gd_min: GroupDelayCurve,
    pub gd_ap: GroupDelayCurve,
}

impl DecomposedHrtf {
    pub fn valid_mask(&self) -> Vec<bool> {
        self.composite.valid_mask()
    }

    /// Largest `||H_ap| - 1|` over the valid mask.
    pub fn all_pass_flatness(&self) -> f64 {
        let mask = self.valid_mask();
        self.all_pass
            .bins
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(b, _)| (b.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest per-bin `|H_min H_ap - H| / |H|` over the valid mask.
    pub fn round_trip_error(&self) -> f64 {
        let mask = self.valid_mask();
        (0..self.composite.len())
            .filter(|&i| mask[i])
            .map(|i| {
                let h = self.composite.bins[i];
                (self.min_phase.bins[i] * self.all_pass.bins[i] - h).norm() / h.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|tau_com - tau_min - tau_ap|` over the valid mask.
    pub fn additivity_error(&self) -> f64 {
        let mask = self.valid_mask();
        (0..self.composite.len())
            .filter(|&i| mask[i])
            .map(|i| {
                let e = (self.gd_composite.values[i] - self.gd_min.values[i] - self.gd_ap.values[i])
                    .abs();
                if e.is_nan() {
                    f64::INFINITY
                } else {
                    e
                }
            })
            .fold(0.0, f64::max)
    }
}
