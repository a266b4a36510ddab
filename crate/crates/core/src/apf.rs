//! Second-order all-pass compensation filter.
//!
//! ```text
//! H(z) = (z^-1 - conj(c1)) / (1 - c1 z^-1) * (z^-1 - conj(c2)) / (1 - c2 z^-1)
//! c1 = r e^{j theta0},  c2 = r e^{-j theta0},  theta0 = 2 pi f0 / fs
//! ```
//!
//! Its group delay peaks at `omega = theta0` with
//! `(1 + r) / (1 - r) + (1 - r^2) / (1 + r^2 - 2 r cos(2 theta0))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::Spectrum;
use crate::notch::{Notch, NotchSource};

/// Upper end of the pole-radius search interval.
pub const R_MAX: f64 = 1.0 - 1e-9;
/// Group delay of the `r = 0` filter (a two-sample delay).
pub const BASELINE_DELAY: f64 = 2.0;
/// Default truncation of the impulse response relative to its peak.
pub const DEFAULT_TAIL_REL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApfError {
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("TargetTooSmall: target delay {target} must exceed the {baseline}-sample baseline")]
    TargetTooSmall { target: f64, baseline: f64 },
    #[error("TargetTooLarge: target delay {target} exceeds {max} reachable with r < 1")]
    TargetTooLarge { target: f64, max: f64 },
    #[error("NoConvergence: bisection for r stopped at {r} with residual {residual}")]
    NoConvergence { r: f64, residual: f64 },
    #[error("InvalidNotch: {0}")]
    InvalidNotch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApfSpec {
    pub r: f64,
    pub f0: f64,
    pub fs: f64,
}

impl ApfSpec {
    pub fn new(r: f64, f0: f64, fs: f64) -> Result<Self, ApfError> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(ApfError::InvalidSpec(format!("fs must be positive, got {fs}")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(ApfError::InvalidSpec(format!("pole radius must be in [0, 1), got {r}")));
        }
        if !(f0 > 0.0 && f0 < fs / 2.0) {
            return Err(ApfError::InvalidSpec(format!(
                "f0 must be in (0, {}), got {f0}",
                fs / 2.0
            )));
        }
        Ok(Self { r, f0, fs })
    }

    pub fn theta0(&self) -> f64 {
        2.0 * PI * self.f0 / self.fs
    }

    pub fn poles(&self) -> [Complex64; 2] {
        let c = Complex64::from_polar(self.r, self.theta0());
        [c, c.conj()]
    }

    /// Conjugate reciprocals of the poles; infinite when `r = 0`.
    pub fn zeros(&self) -> [Complex64; 2] {
        self.poles().map(|c| {
            if c.norm() == 0.0 {
                Complex64::new(f64::INFINITY, 0.0)
            } else {
                Complex64::new(1.0, 0.0) / c.conj()
            }
        })
    }

    /// `(b, a)` with `b = [r^2, -2 r cos theta0, 1]`, `a = [1, -2 r cos theta0, r^2]`.
    pub fn coefficients(&self) -> ([f64; 3], [f64; 3]) {
        let r = self.r;
        let c = -2.0 * r * self.theta0().cos();
        ([r * r, c, 1.0], [1.0, c, r * r])
    }

    /// Group delay at `theta0`, the filter's maximum.
    pub fn peak_delay(&self) -> f64 {
        peak_delay(self.r, self.theta0())
    }
}

/// Frequency response at `omega` rad/sample.
pub fn apf_transfer(spec: &ApfSpec, omega: f64) -> Complex64 {
    let z1 = Complex64::from_polar(1.0, -omega);
    spec.poles()
        .iter()
        .map(|c| (z1 - c.conj()) / (1.0 - c * z1))
        .product()
}

/// Unwrapped phase `-2 w - 2 atan(..(w - theta0)) - 2 atan(..(w + theta0))`.
pub fn apf_phase(spec: &ApfSpec, omega: f64) -> f64 {
    let (r, t) = (spec.r, spec.theta0());
    let term = |u: f64| (r * u.sin()).atan2(1.0 - r * u.cos());
    -2.0 * omega - 2.0 * term(omega - t) - 2.0 * term(omega + t)
}

/// Group delay in samples at `omega`.
pub fn apf_group_delay(spec: &ApfSpec, omega: f64) -> f64 {
    let (r, t) = (spec.r, spec.theta0());
    let q = 1.0 - r * r;
    q / (1.0 + r * r - 2.0 * r * (omega + t).cos()) + q / (1.0 + r * r - 2.0 * r * (omega - t).cos())
}

/// Group delay at `omega = theta0` for pole radius `r`.
pub fn peak_delay(r: f64, theta0: f64) -> f64 {
    (1.0 + r) / (1.0 - r) + (1.0 - r * r) / (1.0 + r * r - 2.0 * r * (2.0 * theta0).cos())
}

/// Pole radius whose peak delay at `theta0 = 2 pi f0 / fs` equals `tau_target`.
pub fn solve_r(f0: f64, fs: f64, tau_target: f64) -> Result<f64, ApfError> {
    ApfSpec::new(0.0, f0, fs)?;
    if !(tau_target > BASELINE_DELAY) {
        return Err(ApfError::TargetTooSmall {
            target: tau_target,
            baseline: BASELINE_DELAY,
        });
    }
    let theta0 = 2.0 * PI * f0 / fs;
    let max = peak_delay(R_MAX, theta0);
    if tau_target > max {
        return Err(ApfError::TargetTooLarge { target: tau_target, max });
    }
    let (mut lo, mut hi) = (0.0, R_MAX);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if peak_delay(mid, theta0) < tau_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let residual = (peak_delay(r, theta0) - tau_target).abs();
    if residual > 1e-9 {
        return Err(ApfError::NoConvergence { r, residual });
    }
    Ok(r)
}

/// Mapping from notch depth to the filter's peak delay:
/// `tau_target = baseline + |depth|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApfDesign {
    pub baseline: f64,
}

impl Default for ApfDesign {
    fn default() -> Self {
        Self {
            baseline: BASELINE_DELAY,
        }
    }
}

pub fn apf_from_notch(n: &Notch, fs: f64) -> Result<ApfSpec, ApfError> {
    apf_from_notch_with(n, fs, &ApfDesign::default())
}

pub fn apf_from_notch_with(n: &Notch, fs: f64, design: &ApfDesign) -> Result<ApfSpec, ApfError> {
    if n.source != NotchSource::AllPass {
        return Err(ApfError::InvalidNotch(format!(
            "notch source is {}, expected all_pass",
            n.source.as_str()
        )));
    }
    if !(n.depth < 0.0) {
        return Err(ApfError::InvalidNotch(format!("notch depth must be negative, got {}", n.depth)));
    }
    let r = solve_r(n.frequency_hz, fs, design.baseline + n.depth.abs())?;
    ApfSpec::new(r, n.frequency_hz, fs)
}

/// Truncated impulse response and a bound on the energy that was cut.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpulseResponse {
    pub taps: Vec<f64>,
    pub tail_energy_bound: f64,
}

/// Impulse response cut where the decaying envelope falls below
/// `tail_rel * max|h|`; the envelope is `2 |alpha c1^n|` from the two-pole
/// partial fraction.
pub fn impulse_response(spec: &ApfSpec, tail_rel: f64) -> ImpulseResponse {
    let (b, a) = spec.coefficients();
    let r = spec.r;
    if r == 0.0 {
        return ImpulseResponse {
            taps: vec![0.0, 0.0, 1.0],
            tail_energy_bound: 0.0,
        };
    }
    let step = |y: &[f64], n: usize| -> f64 {
        let mut v = if n <= 2 { b[n] } else { 0.0 };
        if n >= 1 {
            v -= a[1] * y[n - 1];
        }
        if n >= 2 {
            v -= a[2] * y[n - 2];
        }
        v
    };
    let mut h = Vec::new();
    for n in 0..4 {
        let v = step(&h, n);
        h.push(v);
    }
    // h[n] = 2 Re(alpha c^n) for n >= 1; recover alpha c^2 from h[2], h[3].
    let t = spec.theta0();
    let u = h[2] / 2.0;
    let v = (u * r * t.cos() - h[3] / 2.0) / (r * t.sin());
    let amp2 = (u * u + v * v).sqrt();
    let envelope = |n: usize| 2.0 * amp2 * r.powi(n as i32 - 2);
    let mut peak = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    loop {
        let n = h.len();
        if envelope(n) < tail_rel * peak {
            let e = envelope(n);
            return ImpulseResponse {
                taps: h,
                tail_energy_bound: e * e / (1.0 - r * r),
            };
        }
        let v = step(&h, n);
        peak = peak.max(v.abs());
        h.push(v);
    }
}

/// Exact response on the `n`-point DFT grid.
pub fn apf_spectrum(spec: &ApfSpec, n: usize) -> Spectrum {
    let bins = (0..n)
        .map(|i| apf_transfer(spec, 2.0 * PI * i as f64 / n as f64))
        .collect();
    Spectrum::new(bins, spec.fs)
}
