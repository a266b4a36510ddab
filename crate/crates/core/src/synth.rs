//! Seeded synthetic HRIRs and datasets with known structure.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::apf::{self, ApfError, ApfSpec};
use crate::dsp::{fft, CoordinateSystem, Direction, DspError, Ear, HrirRecord};
use crate::fbs::{FbsError, FbsModel};
use crate::io::{Dataset, IoError, Plane};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian noise under an exponential envelope, after a random onset of
/// up to `n / 10` samples.
pub fn random_hrir(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let onset = rng.random_range(0..=n / 10);
    let decay = rng.random_range(8.0..40.0);
    (0..n)
        .map(|i| {
            if i < onset {
                0.0
            } else {
                normal(rng) * (-((i - onset) as f64) / decay).exp()
            }
        })
        .collect()
}

/// Real polynomial in `z^-1` with the given roots; complex roots must come
/// in conjugate pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct RootPolynomial {
    pub gain: f64,
    pub roots: Vec<Complex64>,
}

impl RootPolynomial {
    /// `gain * prod (1 - z_i z^-1)` as taps.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c = vec![Complex64::new(self.gain, 0.0)];
        for &z in &self.roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &v) in c.iter().enumerate() {
                next[i] += v;
                next[i + 1] -= v * z;
            }
            c = next;
        }
        c.into_iter().map(|v| v.re).collect()
    }

    /// Spectrum on an `nfft` grid after moving every root outside the unit
    /// circle to its conjugate reciprocal, with the gain compensated so the
    /// magnitude is unchanged. The sign makes the DC bin positive.
    pub fn reflected_spectrum(&self, nfft: usize) -> Vec<Complex64> {
        let mut gain = self.gain;
        let roots: Vec<Complex64> = self
            .roots
            .iter()
            .map(|&z| {
                if z.norm() > 1.0 {
                    gain *= z.norm();
                    1.0 / z.conj()
                } else {
                    z
                }
            })
            .collect();
        let mut bins: Vec<Complex64> = (0..nfft)
            .map(|k| {
                let w = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / nfft as f64);
                roots.iter().fold(Complex64::new(gain, 0.0), |acc, &z| acc * (1.0 - z * w))
            })
            .collect();
        if bins[0].re < 0.0 {
            bins.iter_mut().for_each(|b| *b = -*b);
        }
        bins
    }
}

/// Degree 1 to `max_degree`, roots drawn from `radii`; complex roots in
/// conjugate pairs at angles away from 0 and pi.
pub fn random_root_polynomial(rng: &mut impl Rng, max_degree: usize, radii: &[f64]) -> RootPolynomial {
    let degree = rng.random_range(1..=max_degree.max(1));
    let pairs = rng.random_range(0..=degree / 2);
    let mut roots = Vec::with_capacity(degree);
    for _ in 0..pairs {
        let r = radii[rng.random_range(0..radii.len())];
        let a = rng.random_range(0.05 * PI..0.95 * PI);
        let z = Complex64::from_polar(r, a);
        roots.push(z);
        roots.push(z.conj());
    }
    while roots.len() < degree {
        let r = radii[rng.random_range(0..radii.len())];
        roots.push(Complex64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0));
    }
    RootPolynomial {
        gain: rng.random_range(0.5..2.0),
        roots,
    }
}

/// `[1, -2 r cos(w0), r^2]`: a conjugate zero pair at `f0`.
pub fn zero_pair(r: f64, f0: f64, fs: f64) -> [f64; 3] {
    let w0 = 2.0 * PI * f0 / fs;
    [1.0, -2.0 * r * w0.cos(), r * r]
}

/// Fixed minimum-phase body of length `n`: a truncated decaying
/// exponential shaped by two moderate zero pairs, rolled off towards
/// Nyquist by a double zero at -0.9 the way measured responses are.
pub fn min_phase_body(n: usize, fs: f64) -> Vec<f64> {
    assert!(n >= 8, "body needs at least 8 taps");
    let exp: Vec<f64> = (0..n - 6).map(|i| 0.8f64.powi(i as i32)).collect();
    let h = fft::convolve(&exp, &zero_pair(0.7, 2000.0, fs));
    let h = fft::convolve(&h, &zero_pair(0.6, 12000.0, fs));
    fft::convolve(&h, &[1.0, 1.8, 0.81])
}

fn delayed(h: &[f64], delay: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; delay];
    out.extend_from_slice(h);
    out.resize(n, 0.0);
    out
}

/// Body convolved with a zero pair at `f0`, radius `r`.
pub fn zero_pair_notch(n: usize, fs: f64, f0: f64, r: f64) -> Vec<f64> {
    let mut h = fft::convolve(&min_phase_body(n - 2, fs), &zero_pair(r, f0, fs));
    h.truncate(n);
    h
}

/// `body (*) delta[n - delay] (*) apf(r, f0)`, cut to `n` samples.
pub fn min_phase_with_apf(n: usize, fs: f64, delay: usize, r: f64, f0: f64) -> Result<Vec<f64>, ApfError> {
    let spec = ApfSpec::new(r, f0, fs)?;
    let ir = apf::impulse_response(&spec, apf::DEFAULT_TAIL_REL);
    let body = delayed(&min_phase_body(n, fs), delay, n);
    let mut h = fft::convolve(&body, &ir.taps);
    h.truncate(n);
    Ok(h)
}

/// Zero pair of radius `r` whose frequency moves linearly from `f_lo` at
/// the first elevation to `f_hi` at the last.
pub fn notch_sweep(
    n: usize,
    fs: f64,
    elevations: &[f64],
    f_lo: f64,
    f_hi: f64,
    r: f64,
) -> Result<Vec<HrirRecord>, DspError> {
    let steps = elevations.len().saturating_sub(1).max(1) as f64;
    elevations
        .iter()
        .enumerate()
        .map(|(i, &el)| {
            let f0 = f_lo + (f_hi - f_lo) * i as f64 / steps;
            Ok(HrirRecord::new(zero_pair_notch(n, fs, f0, r), fs)?
                .with_direction(Direction::new(0.0, el))
                .with_coordinates(CoordinateSystem::InterauralPolar))
        })
        .collect()
}

/// FBS model with random coefficients for `|m| <= m_max`, `k_min..=k_max`
/// and `f_max = fs / 2`. The `m = 0` terms are real so every HRIR it
/// evaluates to is real with a real DC bin.
pub fn bandlimited_model(
    rng: &mut impl Rng,
    m_max: usize,
    k_min: usize,
    k_max: usize,
    fs: f64,
) -> Result<FbsModel, FbsError> {
    let mut model = FbsModel::zeros_like(m_max, k_min, k_max, fs / 2.0, fs)?;
    for m in -(m_max as i64)..=m_max as i64 {
        for k in k_min..=k_max {
            let scale = 1.0 / (1.0 + m.unsigned_abs() as f64) / (k as f64).sqrt();
            let v = if m == 0 {
                Complex64::new(normal(rng) * scale, 0.0)
            } else {
                Complex64::new(normal(rng), normal(rng)) * scale
            };
            model.set_coeff(m, k, v)?;
        }
    }
    Ok(model)
}

/// HRIRs of `model` at `count` uniform angles, with the angles in radians.
pub fn sample_circle(model: &FbsModel, count: usize, n: usize) -> Result<(Vec<HrirRecord>, Vec<f64>), FbsError> {
    let eval = model.evaluator(n)?;
    let thetas: Vec<f64> = (0..count).map(|j| 2.0 * PI * j as f64 / count as f64).collect();
    let records = thetas
        .iter()
        .map(|&t| eval.record(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((records, thetas))
}

/// Circle angle, in degrees, over which [`injected_apf_circle`] adds the
/// all-pass section.
pub const INJECTED_RANGE_DEG: (f64, f64) = (90.0, 180.0);

/// Median-plane dataset (interaural-polar), one record per `step_deg` of
/// circle angle. Every record is the minimum-phase body after a delay of 5
/// samples; inside [`INJECTED_RANGE_DEG`] an all-pass section (r = 0.96,
/// f0 = 6991 Hz) is added. The right ear is the left delayed by 3 samples.
pub fn injected_apf_circle(n: usize, fs: f64, step_deg: f64) -> Result<Dataset, SynthError> {
    let count = (360.0 / step_deg).round() as usize;
    let plain = delayed(&min_phase_body(n, fs), 5, n);
    let with_apf = min_phase_with_apf(n, fs, 5, 0.96, 6991.0)?;
    let cs = CoordinateSystem::InterauralPolar;
    let mut records = Vec::with_capacity(2 * count);
    for j in 0..count {
        let deg = j as f64 * step_deg;
        let inside = deg >= INJECTED_RANGE_DEG.0 - 1e-9 && deg <= INJECTED_RANGE_DEG.1 + 1e-9;
        let h = if inside { &with_apf } else { &plain };
        let d = Plane::Median.direction_at(deg.to_radians(), cs);
        records.push(HrirRecord::new(h.clone(), fs)?.with_direction(d).with_ear(Ear::Left));
        records.push(HrirRecord::new(delayed(h, 3, n), fs)?.with_direction(d).with_ear(Ear::Right));
    }
    Ok(Dataset::new("injected-apf", cs, records)?)
}

/// Vertical-polar horizontal-plane dataset whose HRIRs vary with azimuth
/// through first-order angular harmonics of three fixed bodies.
pub fn horizontal_circle(n: usize, fs: f64, step_deg: f64) -> Result<Dataset, SynthError> {
    let count = (360.0 / step_deg).round() as usize;
    let b0 = delayed(&min_phase_body(n, fs), 4, n);
    let b1 = delayed(&zero_pair_notch(n, fs, 7000.0, 0.9), 6, n);
    let b2 = delayed(&zero_pair_notch(n, fs, 10000.0, 0.85), 8, n);
    let mut records = Vec::with_capacity(2 * count);
    for j in 0..count {
        let az = j as f64 * step_deg;
        let a = az.to_radians();
        for (ear, s) in [(Ear::Left, 1.0), (Ear::Right, -1.0)] {
            let h: Vec<f64> = (0..n)
                .map(|i| b0[i] + 0.5 * a.cos() * b1[i] + 0.4 * s * a.sin() * b2[i])
                .collect();
            records.push(HrirRecord::new(h, fs)?.with_direction(Direction::new(az, 0.0)).with_ear(ear));
        }
    }
    Ok(Dataset::new("horizontal", CoordinateSystem::VerticalPolar, records)?)
}

/// Gaussian white noise with standard deviation `amp`.
pub fn noise(rng: &mut impl Rng, len: usize, amp: f64) -> Vec<f64> {
    (0..len).map(|_| amp * normal(rng)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Apf(#[from] ApfError),
    #[error(transparent)]
    Fbs(#[from] FbsError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_from_roots() {
        let p = RootPolynomial {
            gain: 2.0,
            roots: vec![Complex64::new(0.5, 0.0), Complex64::new(-2.0, 0.0)],
        };
        let c = p.coefficients();
        // 2 (1 - 0.5 x)(1 + 2 x) = 2 + 3 x - 2 x^2
        assert_eq!(c, vec![2.0, 3.0, -2.0]);
    }

    #[test]
    fn reflection_preserves_magnitude() {
        let mut r = rng(3);
        let p = random_root_polynomial(&mut r, 12, &[0.5, 0.9, 1.5, 2.0]);
        let direct = fft::rfft(&{
            let mut c = p.coefficients();
            c.resize(64, 0.0);
            c
        });
        let refl = p.reflected_spectrum(64);
        for (a, b) in direct.iter().zip(&refl) {
            assert!((a.norm() - b.norm()).abs() < 1e-9 * a.norm().max(1.0));
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        assert_eq!(random_hrir(&mut rng(9), 64), random_hrir(&mut rng(9), 64));
        assert_ne!(random_hrir(&mut rng(9), 64), random_hrir(&mut rng(10), 64));
    }

    #[test]
    fn body_has_the_requested_length() {
        assert_eq!(min_phase_body(200, 44100.0).len(), 200);
        assert_eq!(zero_pair_notch(200, 44100.0, 8000.0, 0.98).len(), 200);
        assert_eq!(min_phase_with_apf(200, 44100.0, 5, 0.96, 6991.0).unwrap().len(), 200);
    }
}
