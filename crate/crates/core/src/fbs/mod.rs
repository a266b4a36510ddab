//! Fourier-Bessel series on a circle of directions.
//!
//! ```text
//! H(f, theta) = sum_m sum_k C_mk J_|m|(beta_k^|m| f / f_max) e^{j m theta}
//! ```
//!
//! Fitting first takes the exact angular DFT of the training spectra at every
//! frequency of the half-spectrum grid, then solves for the radial
//! coefficients of each order. The default solver is least squares on the
//! sampled Bessel basis, which reproduces in-span data to rounding error.
//! [`FitMethod::Projection`] uses the orthogonality quadrature instead:
//!
//! ```text
//! C_mk = 2 / ((M - 1) N J_{|m|+1}(beta_k)^2 f_max) sum_i sum_j f_i H(f_i, theta_j) J_|m|(beta_k f_i / f_max) e^{-j m theta_j}
//! ```
//!
//! with `M` frequency points spanning `[0, f_max]` and `N` angles (for other
//! grids `1 / (M - 1)` becomes the bin spacing over `f_max`).
//!
//! Every basis function vanishes at `f_max`, and all but `m = 0` vanish at DC.

pub mod bessel;
pub mod format;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{fft, DspError, HrirRecord};

pub use bessel::{bessel_j, bessel_j_orders, bessel_zeros, discrete_orthogonality};

/// Tolerance on the uniform angle grid, radians.
pub const ANGLE_GRID_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbsError {
    #[error("OrderOverflow: Bessel order {n} exceeds 64")]
    OrderOverflow { n: usize },
    #[error("ArgumentOutOfRange: Bessel argument {x} outside [0, 1e5]")]
    ArgumentOutOfRange { x: f64 },
    #[error("TooManyZeros: {count} zeros requested, at most 128 supported")]
    TooManyZeros { count: usize },
    #[error("ConvergenceFailure: zero of J_{n} near {near} did not converge")]
    ConvergenceFailure { n: usize, near: f64 },
    #[error("AngleGridNotUniform: angle {index} deviates {deviation:e} rad from the uniform grid")]
    AngleGridNotUniform { index: usize, deviation: f64 },
    #[error("InsufficientAngles: {n_grid} angles cannot resolve orders up to {m_max} (need more than {})", 2 * m_max)]
    InsufficientAngles { n_grid: usize, m_max: usize },
    #[error("FrequencyOutOfRange: {f} Hz outside [0, {f_max}]")]
    FrequencyOutOfRange { f: f64, f_max: f64 },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("InconsistentRecords: {0}")]
    InconsistentRecords(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    #[default]
    LeastSquares,
    Projection,
}

impl std::str::FromStr for FitMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "least-squares" | "lsq" | "ls" => Ok(FitMethod::LeastSquares),
            "projection" => Ok(FitMethod::Projection),
            other => Err(format!("unknown fit method '{other}' (least-squares, projection)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbsConfig {
    pub m_max: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Normalization edge; `None` means `fs / 2`.
    pub f_max: Option<f64>,
    pub method: FitMethod,
}

impl Default for FbsConfig {
    fn default() -> Self {
        Self {
            m_max: 10,
            k_min: 1,
            k_max: 70,
            f_max: None,
            method: FitMethod::LeastSquares,
        }
    }
}

impl FbsConfig {
    pub fn validate(&self) -> Result<(), FbsError> {
        if self.m_max > bessel::MAX_ORDER {
            return Err(FbsError::OrderOverflow { n: self.m_max });
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(FbsError::InvalidConfig(format!(
                "need 1 <= k_min <= k_max, got k_min={} k_max={}",
                self.k_min, self.k_max
            )));
        }
        if self.k_max > bessel::MAX_ZEROS {
            return Err(FbsError::TooManyZeros { count: self.k_max });
        }
        if let Some(f) = self.f_max {
            if !(f > 0.0 && f.is_finite()) {
                return Err(FbsError::InvalidConfig(format!("f_max must be positive, got {f}")));
            }
        }
        Ok(())
    }
}

/// Fitted coefficient matrix, rows `m = -M_max..=M_max`, columns
/// `k = K_min..=K_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct FbsModel {
    pub m_max: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub f_max: f64,
    pub fs: f64,
    coeffs: Vec<Complex64>,
    /// `zeros[|m|][k - 1]`
    zeros: Vec<Vec<f64>>,
    /// Frequency points used at fit time (0 when unknown).
    pub m_grid: usize,
    /// Angles used at fit time (0 when unknown).
    pub n_grid: usize,
    /// Max relative L2 error over training angles (NaN when unknown).
    pub fit_residual: f64,
    pub plane: Option<String>,
}

impl FbsModel {
    pub fn new(
        m_max: usize,
        k_min: usize,
        k_max: usize,
        f_max: f64,
        fs: f64,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, FbsError> {
        FbsConfig {
            m_max,
            k_min,
            k_max,
            f_max: Some(f_max),
            method: FitMethod::default(),
        }
        .validate()?;
        let expected = (2 * m_max + 1) * (k_max - k_min + 1);
        if coeffs.len() != expected {
            return Err(FbsError::InvalidConfig(format!(
                "coefficient matrix has {} entries, expected {expected}",
                coeffs.len()
            )));
        }
        let zeros = (0..=m_max)
            .map(|m| bessel_zeros(m, k_max))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            m_max,
            k_min,
            k_max,
            f_max,
            fs,
            coeffs,
            zeros,
            m_grid: 0,
            n_grid: 0,
            fit_residual: f64::NAN,
            plane: None,
        })
    }

    /// All-zero coefficient matrix.
    pub fn zeros_like(m_max: usize, k_min: usize, k_max: usize, f_max: f64, fs: f64) -> Result<Self, FbsError> {
        let n = (2 * m_max + 1) * (k_max.saturating_sub(k_min) + 1);
        Self::new(m_max, k_min, k_max, f_max, fs, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn n_k(&self) -> usize {
        self.k_max - self.k_min + 1
    }

    fn index(&self, m: i64, k: usize) -> Option<usize> {
        if m.unsigned_abs() as usize > self.m_max || k < self.k_min || k > self.k_max {
            return None;
        }
        Some((m + self.m_max as i64) as usize * self.n_k() + (k - self.k_min))
    }

    pub fn coeff(&self, m: i64, k: usize) -> Option<Complex64> {
        self.index(m, k).map(|i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, m: i64, k: usize, value: Complex64) -> Result<(), FbsError> {
        let i = self
            .index(m, k)
            .ok_or_else(|| FbsError::InvalidConfig(format!("coefficient ({m}, {k}) outside the truncation")))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Row-major coefficient matrix.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn bessel_zero(&self, m_abs: usize, k: usize) -> f64 {
        self.zeros[m_abs][k - 1]
    }

    fn check_freq(&self, f: f64) -> Result<f64, FbsError> {
        if !(f >= 0.0 && f <= self.f_max * (1.0 + 1e-12)) {
            return Err(FbsError::FrequencyOutOfRange { f, f_max: self.f_max });
        }
        Ok((f / self.f_max).min(1.0))
    }

    /// Radial sums `sum_k C_mk J_|m|(beta_k x)` for every order at `x = f / f_max`.
    fn radial(&self, x: f64) -> Result<Vec<Complex64>, FbsError> {
        let nk = self.n_k();
        let mut per_abs = Vec::with_capacity(self.m_max + 1);
        for m_abs in 0..=self.m_max {
            let js = (self.k_min..=self.k_max)
                .map(|k| bessel_j(m_abs, self.zeros[m_abs][k - 1] * x))
                .collect::<Result<Vec<_>, _>>()?;
            per_abs.push(js);
        }
        Ok((0..2 * self.m_max + 1)
            .map(|row| {
                let m_abs = (row as i64 - self.m_max as i64).unsigned_abs() as usize;
                let c = &self.coeffs[row * nk..(row + 1) * nk];
                c.iter().zip(&per_abs[m_abs]).map(|(c, j)| c * j).sum()
            })
            .collect())
    }

    /// Precomputes the radial profiles on the `n`-point DFT grid.
    pub fn evaluator(&self, n: usize) -> Result<FbsEvaluator, FbsError> {
        if n < crate::dsp::MIN_HRIR_LEN {
            return Err(FbsError::Dsp(DspError::TooShort {
                len: n,
                min: crate::dsp::MIN_HRIR_LEN,
            }));
        }
        let half = n / 2 + 1;
        let rows = 2 * self.m_max + 1;
        let columns: Vec<Option<Vec<Complex64>>> = (0..half)
            .into_par_iter()
            .map(|i| {
                let f = i as f64 * self.fs / n as f64;
                if f > self.f_max * (1.0 + 1e-12) {
                    Ok(None)
                } else {
                    self.radial((f / self.f_max).min(1.0)).map(Some)
                }
            })
            .collect::<Result<_, FbsError>>()?;
        let mut profiles = vec![vec![Complex64::new(0.0, 0.0); half]; rows];
        for (i, col) in columns.into_iter().enumerate() {
            if let Some(col) = col {
                for (row, v) in col.into_iter().enumerate() {
                    profiles[row][i] = v;
                }
            }
        }
        Ok(FbsEvaluator {
            n,
            fs: self.fs,
            m_max: self.m_max,
            profiles,
        })
    }
}

/// Evaluates `H(f, theta)` at one point.
pub fn fbs_eval(model: &FbsModel, f: f64, theta: f64) -> Result<Complex64, FbsError> {
    let x = model.check_freq(f)?;
    let radial = model.radial(x)?;
    Ok(radial
        .iter()
        .enumerate()
        .map(|(row, r)| r * Complex64::from_polar(1.0, (row as i64 - model.m_max as i64) as f64 * theta))
        .sum())
}

/// Radial profiles of a model on a fixed DFT grid; evaluating a new angle
/// only costs the angular sum.
#[derive(Clone, Debug)]
pub struct FbsEvaluator {
    n: usize,
    fs: f64,
    m_max: usize,
    /// `profiles[m + M_max][i]` for bins `0..=n/2`; zero above `f_max`.
    profiles: Vec<Vec<Complex64>>,
}

impl FbsEvaluator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Half spectrum (bins `0..=n/2`) at `theta`.
    pub fn half_spectrum(&self, theta: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n / 2 + 1];
        for (row, prof) in self.profiles.iter().enumerate() {
            let e = Complex64::from_polar(1.0, (row as i64 - self.m_max as i64) as f64 * theta);
            for (o, p) in out.iter_mut().zip(prof) {
                *o += p * e;
            }
        }
        out
    }

    /// Real HRIR at `theta`: DC and Nyquist are made real and the upper
    /// half mirrored before the inverse transform.
    pub fn hrir(&self, theta: f64) -> Vec<f64> {
        let half = self.half_spectrum(theta);
        let n = self.n;
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        for (i, v) in half.iter().enumerate() {
            full[i] = *v;
        }
        full[0].im = 0.0;
        if n % 2 == 0 {
            full[n / 2].im = 0.0;
        }
        for i in 1..n.div_ceil(2) {
            full[n - i] = full[i].conj();
        }
        fft::irfft(&full)
    }

    pub fn record(&self, theta: f64) -> Result<HrirRecord, FbsError> {
        Ok(HrirRecord::new(self.hrir(theta), self.fs)?)
    }
}

/// HRIR of length `n` at `theta`. Bins above `f_max` are set to zero.
pub fn fbs_reconstruct_hrir(model: &FbsModel, theta: f64, n: usize) -> Result<HrirRecord, FbsError> {
    model.evaluator(n)?.record(theta)
}

/// Checks `theta_j = theta_0 + 2 pi j / N` within [`ANGLE_GRID_TOL`].
pub fn check_uniform_grid(thetas: &[f64]) -> Result<(), FbsError> {
    let n = thetas.len();
    let t0 = *thetas.first().ok_or(FbsError::InsufficientAngles { n_grid: 0, m_max: 0 })?;
    for (j, &t) in thetas.iter().enumerate() {
        let deviation = (t - t0 - 2.0 * PI * j as f64 / n as f64).abs();
        if !(deviation <= ANGLE_GRID_TOL) {
            return Err(FbsError::AngleGridNotUniform { index: j, deviation });
        }
    }
    Ok(())
}

struct AngularData {
    n: usize,
    fs: f64,
    n_grid: usize,
    spectra: Vec<Vec<Complex64>>,
    /// `angular[m + M_max][i] = (1/N) sum_j H_j(f_i) e^{-j m theta_j}`
    angular: Vec<Vec<Complex64>>,
}

/// Checks the circle and takes the angular DFT of the first `n_freq(n, fs)`
/// half-spectrum bins.
fn angular_dft(
    records: &[HrirRecord],
    thetas: &[f64],
    m_max: usize,
    n_freq: impl Fn(usize, f64) -> usize,
) -> Result<AngularData, FbsError> {
    if records.len() != thetas.len() {
        return Err(FbsError::InconsistentRecords(format!(
            "{} records but {} angles",
            records.len(),
            thetas.len()
        )));
    }
    let n_grid = records.len();
    if n_grid <= 2 * m_max {
        return Err(FbsError::InsufficientAngles { n_grid, m_max });
    }
    check_uniform_grid(thetas)?;
    let (n, fs) = (records[0].len(), records[0].fs());
    if let Some(r) = records.iter().find(|r| r.len() != n || r.fs() != fs) {
        return Err(FbsError::InconsistentRecords(format!(
            "record of length {} at {} Hz, expected {n} at {fs} Hz",
            r.len(),
            r.fs()
        )));
    }
    let bins = n_freq(n, fs);
    let spectra: Vec<Vec<Complex64>> = records
        .iter()
        .map(|r| {
            let mut s = fft::rfft(r.samples());
            s.truncate(bins);
            s
        })
        .collect();
    let angular = (0..2 * m_max + 1)
        .map(|row| {
            let m = row as f64 - m_max as f64;
            let mut acc = vec![Complex64::new(0.0, 0.0); bins];
            for (s, &t) in spectra.iter().zip(thetas) {
                let e = Complex64::from_polar(1.0 / n_grid as f64, -m * t);
                for (a, v) in acc.iter_mut().zip(s) {
                    *a += v * e;
                }
            }
            acc
        })
        .collect();
    Ok(AngularData {
        n,
        fs,
        n_grid,
        spectra,
        angular,
    })
}

/// Truncated angular Fourier series at every DFT bin: the FBS expansion
/// with a radial basis that spans all bins, so only the angular truncation
/// at `m_max` remains.
pub fn angular_series(records: &[HrirRecord], thetas: &[f64], m_max: usize) -> Result<FbsEvaluator, FbsError> {
    let d = angular_dft(records, thetas, m_max, |n, _| n / 2 + 1)?;
    Ok(FbsEvaluator {
        n: d.n,
        fs: d.fs,
        m_max,
        profiles: d.angular,
    })
}

/// Fits a model to records on a circle. `thetas[j]` is the circle angle of
/// `records[j]` in radians.
///
/// `f_max` may exceed `fs / 2` for least squares, which keeps the basis from
/// forcing the Nyquist bin to zero; projection needs the full `[0, f_max]`
/// grid.
pub fn fbs_fit(records: &[HrirRecord], thetas: &[f64], cfg: &FbsConfig) -> Result<FbsModel, FbsError> {
    cfg.validate()?;
    let fs0 = records.first().map_or(0.0, |r| r.fs());
    let f_max = cfg.f_max.unwrap_or(fs0 / 2.0);
    if cfg.method == FitMethod::Projection && f_max > fs0 / 2.0 * (1.0 + 1e-12) {
        return Err(FbsError::InvalidConfig(format!(
            "projection needs f_max <= fs/2 = {}, got {f_max}",
            fs0 / 2.0
        )));
    }
    let n_freq = |n: usize, fs: f64| {
        (0..=n / 2)
            .take_while(|&i| i as f64 * fs / n as f64 <= f_max * (1.0 + 1e-12))
            .count()
    };
    let AngularData {
        n,
        fs,
        n_grid,
        spectra,
        angular,
    } = angular_dft(records, thetas, cfg.m_max, n_freq)?;
    let n_freq = n_freq(n, fs);
    if n_freq < 2 {
        return Err(FbsError::InvalidConfig("fewer than two frequency points below f_max".into()));
    }
    let xs: Vec<f64> = (0..n_freq)
        .map(|i| (i as f64 * fs / n as f64 / f_max).min(1.0))
        .collect();
    let rows = 2 * cfg.m_max + 1;

    let nk = cfg.k_max - cfg.k_min + 1;
    let zeros = (0..=cfg.m_max)
        .map(|m| bessel_zeros(m, cfg.k_max))
        .collect::<Result<Vec<_>, _>>()?;

    // Per |m|: a linear map from sampled radial data to coefficients.
    let solvers: Vec<DMatrix<f64>> = (0..=cfg.m_max)
        .into_par_iter()
        .map(|m_abs| {
            let mut basis = DMatrix::<f64>::zeros(n_freq, nk);
            for (c, k) in (cfg.k_min..=cfg.k_max).enumerate() {
                let beta = zeros[m_abs][k - 1];
                for (i, &x) in xs.iter().enumerate() {
                    basis[(i, c)] = bessel_j(m_abs, beta * x)?;
                }
            }
            Ok(match cfg.method {
                FitMethod::LeastSquares => {
                    let svd = basis.svd(true, true);
                    let smax = svd.singular_values.max();
                    let tol = smax * f64::EPSILON * n_freq.max(nk) as f64;
                    svd.pseudo_inverse(tol).map_err(|e| FbsError::InvalidConfig(e.to_string()))?
                }
                FitMethod::Projection => {
                    let mut p = basis.transpose();
                    let dx = fs / n as f64 / f_max;
                    for (c, k) in (cfg.k_min..=cfg.k_max).enumerate() {
                        let jp = bessel_j(m_abs + 1, zeros[m_abs][k - 1])?;
                        let scale = 2.0 * dx / (jp * jp);
                        for (i, &x) in xs.iter().enumerate() {
                            // f_i / f_max = x_i
                            p[(c, i)] *= scale * x;
                        }
                    }
                    p
                }
            })
        })
        .collect::<Result<_, FbsError>>()?;

    let mut coeffs = vec![Complex64::new(0.0, 0.0); rows * nk];
    for (row, a) in angular.iter().enumerate() {
        let m_abs = (row as i64 - cfg.m_max as i64).unsigned_abs() as usize;
        let re = DVector::from_iterator(n_freq, a.iter().map(|v| v.re));
        let im = DVector::from_iterator(n_freq, a.iter().map(|v| v.im));
        let cr = &solvers[m_abs] * re;
        let ci = &solvers[m_abs] * im;
        for c in 0..nk {
            coeffs[row * nk + c] = Complex64::new(cr[c], ci[c]);
        }
    }

    let mut model = FbsModel {
        m_max: cfg.m_max,
        k_min: cfg.k_min,
        k_max: cfg.k_max,
        f_max,
        fs,
        coeffs,
        zeros,
        m_grid: n_freq,
        n_grid,
        fit_residual: f64::NAN,
        plane: None,
    };
    let eval = model.evaluator(n)?;
    model.fit_residual = spectra
        .iter()
        .zip(thetas)
        .map(|(s, &t)| {
            let rec = eval.half_spectrum(t);
            let num: f64 = s.iter().zip(&rec).map(|(a, b)| (a - b).norm_sqr()).sum();
            let den: f64 = s.iter().map(|a| a.norm_sqr()).sum();
            (num / den).sqrt()
        })
        .fold(0.0, f64::max);
    Ok(model)
}
