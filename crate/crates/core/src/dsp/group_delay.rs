use num_complex::Complex64;

use super::fft;
use super::{DspError, GroupDelayCurve, Spectrum, SPECTRAL_FLOOR_REL};

/// `tau[i] = Re(D[i] conj(X[i])) / |X[i]|^2` with `X = DFT(x)` and
/// `D = DFT(n x[n])`; bins with `|X| < 1e-10 max|X|` are NaN.
fn ratio_curve(x: &[Complex64], spectrum: &[Complex64], fs: f64) -> Result<GroupDelayCurve, DspError> {
    if x.is_empty() {
        return Err(DspError::EmptyInput);
    }
    let peak = spectrum.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(DspError::AllZeroInput);
    }
    let ramp: Vec<Complex64> = x.iter().enumerate().map(|(n, v)| v * n as f64).collect();
    let d = fft::fft(&ramp);
    let floor = SPECTRAL_FLOOR_REL * peak;
    let values = spectrum
        .iter()
        .zip(&d)
        .map(|(xb, db)| {
            let den = xb.norm_sqr();
            if xb.norm() < floor {
                f64::NAN
            } else {
                (xb.re * db.re + xb.im * db.im) / den
            }
        })
        .collect();
    Ok(GroupDelayCurve::new(values, fs))
}

/// Group delay of a real sequence in samples, one value per DFT bin.
pub fn group_delay(h: &[f64], fs: f64) -> Result<GroupDelayCurve, DspError> {
    let x: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spec = fft::fft(&x);
    ratio_curve(&x, &spec, fs)
}

/// Group delay of a spectrum through its inverse transform; agrees with
/// [`group_delay`] applied to `IDFT(S)`.
pub fn group_delay_from_spectrum(s: &Spectrum) -> Result<GroupDelayCurve, DspError> {
    let x = fft::ifft(&s.bins);
    ratio_curve(&x, &s.bins, s.fs)
}
