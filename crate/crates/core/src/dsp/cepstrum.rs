use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft;
use super::group_delay::group_delay_from_spectrum;
use super::{
    DecomposedHrtf, DspError, HrirRecord, Spectrum, SPECTRAL_FLOOR_REL, VALID_MASK_REL,
    ZERO_BIN_REL,
};

/// Standard +-pi jump unwrapping along increasing index.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phase {
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
            } else if d < -PI {
                offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

fn half_unwrapped_phase(bins: &[Complex64]) -> Vec<f64> {
    let half = bins.len() / 2;
    let raw: Vec<f64> = bins[..=half].iter().map(|b| b.arg()).collect();
    unwrap_phase(&raw)
}

fn delay_from_half_phase(unwrapped: &[f64], n: usize) -> i64 {
    let last = unwrapped.len() - 1;
    if last == 0 {
        return 0;
    }
    let omega = 2.0 * PI * last as f64 / n as f64;
    (-unwrapped[last] / omega).round() as i64
}

/// Integer linear-phase delay of a spectrum, estimated from its unwrapped
/// phase at Nyquist (or the last half-spectrum bin for odd lengths).
pub fn linear_phase_delay(s: &Spectrum) -> i64 {
    if s.len() < 2 {
        return 0;
    }
    delay_from_half_phase(&half_unwrapped_phase(&s.bins), s.len())
}

/// Complex cepstrum of a real-sequence spectrum. With `floor` set, magnitudes
/// are clamped from below instead of rejected.
fn cepstrum_of_bins(bins: &[Complex64], floor: Option<f64>) -> Result<Vec<f64>, DspError> {
    let n = bins.len();
    if n == 0 {
        return Err(DspError::EmptyInput);
    }
    let peak = bins.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(DspError::AllZeroInput);
    }
    let half = n / 2;
    let mut log_mag = vec![0.0; half + 1];
    for (i, b) in bins[..=half].iter().enumerate() {
        let m = b.norm();
        log_mag[i] = match floor {
            Some(rel) => m.max(rel * peak).ln(),
            None => {
                if m < ZERO_BIN_REL * peak {
                    return Err(DspError::ZeroSpectrumBin { bin: i });
                }
                m.ln()
            }
        };
    }
    if floor.is_none() {
        if let Some(bin) = (half + 1..n).find(|&i| bins[i].norm() < ZERO_BIN_REL * peak) {
            return Err(DspError::ZeroSpectrumBin { bin });
        }
    }

    let mut phase = half_unwrapped_phase(bins);
    let delay = delay_from_half_phase(&phase, n) as f64;
    for (i, p) in phase.iter_mut().enumerate() {
        *p += delay * 2.0 * PI * i as f64 / n as f64;
    }
    // Phase of a real sequence at DC and Nyquist is a multiple of pi after
    // delay removal; pin it so the mirrored log spectrum stays Hermitian.
    phase[0] = 0.0;
    if n % 2 == 0 {
        phase[half] = 0.0;
    }

    let mut log_spec = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..=half {
        log_spec[i] = Complex64::new(log_mag[i], phase[i]);
    }
    for i in half + 1..n {
        log_spec[i] = log_spec[n - i].conj();
    }
    Ok(fft::irfft(&log_spec))
}

/// Complex cepstrum `IDFT(ln|H| + j arg_unwrapped H)` with the integer
/// linear-phase component removed before the inverse transform.
pub fn complex_cepstrum(h: &HrirRecord) -> Result<Vec<f64>, DspError> {
    cepstrum_of_bins(&fft::rfft(h.samples()), None)
}

/// Maps the non-causal half of a cepstrum onto the causal half.
///
/// Even `N`: `out[0] = c[0]`, `out[N/2] = c[N/2]`, `out[k] = c[k] + c[N-k]`
/// for `k in 1..N/2`, zero above. Odd `N`: `out[0] = c[0]`,
/// `out[k] = c[k] + c[N-k]` for `k in 1..=(N-1)/2`, zero above.
pub fn fold_cepstrum(cepstrum: &[f64], n: usize) -> Result<Vec<f64>, DspError> {
    if cepstrum.len() != n {
        return Err(DspError::LengthMismatch {
            expected: n,
            got: cepstrum.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out = vec![0.0; n];
    out[0] = cepstrum[0];
    if n % 2 == 0 {
        let half = n / 2;
        for k in 1..half {
            out[k] = cepstrum[k] + cepstrum[n - k];
        }
        out[half] = cepstrum[half];
    } else {
        for k in 1..=(n - 1) / 2 {
            out[k] = cepstrum[k] + cepstrum[n - k];
        }
    }
    Ok(out)
}

fn minimum_phase_of_bins(bins: &[Complex64], fs: f64) -> Result<Spectrum, DspError> {
    let n = bins.len();
    let ceps = cepstrum_of_bins(bins, Some(SPECTRAL_FLOOR_REL))?;
    let folded = fold_cepstrum(&ceps, n)?;
    let log_min = fft::rfft(&folded);
    Ok(Spectrum::new(log_min.into_iter().map(|v| v.exp()).collect(), fs))
}

/// Minimum-phase spectrum sharing the magnitude of `h` (after flooring).
pub fn minimum_phase(h: &HrirRecord) -> Result<Spectrum, DspError> {
    minimum_phase_of_bins(&h.spectrum().bins, h.fs())
}

/// `H / H_min`, bin by bin.
pub fn all_pass_component(h: &HrirRecord, h_min: &Spectrum) -> Result<Spectrum, DspError> {
    all_pass_of(&h.spectrum(), h_min)
}

fn all_pass_of(composite: &Spectrum, h_min: &Spectrum) -> Result<Spectrum, DspError> {
    if composite.len() != h_min.len() {
        return Err(DspError::LengthMismatch {
            expected: composite.len(),
            got: h_min.len(),
        });
    }
    let peak = composite.max_magnitude();
    let mask_thr = VALID_MASK_REL * peak;
    let floor = SPECTRAL_FLOOR_REL * peak;
    let mut bins = Vec::with_capacity(composite.len());
    for (i, (h, m)) in composite.bins.iter().zip(&h_min.bins).enumerate() {
        if m.norm() < floor {
            if h.norm() >= mask_thr {
                return Err(DspError::DivisionUnderflow { bin: i });
            }
            bins.push(Complex64::new(1.0, 0.0));
        } else {
            bins.push(h / m);
        }
    }
    Ok(Spectrum::new(bins, composite.fs))
}

/// Full decomposition of `h` into minimum-phase and all-pass factors plus the
/// group delay of each.
pub fn decompose(h: &HrirRecord) -> Result<DecomposedHrtf, DspError> {
    let composite = h.spectrum();
    let min_phase = minimum_phase_of_bins(&composite.bins, h.fs())?;
    let all_pass = all_pass_of(&composite, &min_phase)?;
    let gd_composite = super::group_delay(h.samples(), h.fs())?;
    let gd_min = group_delay_from_spectrum(&min_phase)?;
    let gd_ap = group_delay_from_spectrum(&all_pass)?;
    Ok(DecomposedHrtf {
        composite,
        min_phase,
        all_pass,
        gd_composite,
        gd_min,
        gd_ap,
    })
}
