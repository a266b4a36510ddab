//! Linear-prediction stage of the LP-GD pipeline.

use std::f64::consts::PI;

use super::NotchError;

/// Biased autocorrelation `r[k] = (1/L) sum_n h[n] h[n+k]`, `k in 0..L`.
pub fn autocorrelation(h: &[f64]) -> Vec<f64> {
    let l = h.len();
    (0..l)
        .map(|k| h[..l - k].iter().zip(&h[k..]).map(|(a, b)| a * b).sum::<f64>() / l as f64)
        .collect()
}

/// Decreasing half of a Hann window: `w[k] = 0.5 (1 + cos(pi k / L))`.
pub fn half_hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|k| 0.5 * (1.0 + (PI * k as f64 / len as f64).cos()))
        .collect()
}

/// Levinson-Durbin recursion. Returns the prediction-error filter
/// `a = [1, a_1, .., a_p]` and the final prediction-error variance.
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<(Vec<f64>, f64), NotchError> {
    if r.len() <= order {
        return Err(NotchError::TooShort {
            len: r.len(),
            min: order + 1,
        });
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    if !(err > 0.0) {
        return Err(NotchError::SingularToeplitz { stage: 0 });
    }
    let mut prev = a.clone();
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| prev[j] * r[i - j]).sum::<f64>() + r[i];
        let k = -acc / err;
        a[i] = k;
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        err *= 1.0 - k * k;
        if !(err > 0.0) {
            return Err(NotchError::SingularToeplitz { stage: i });
        }
        prev.copy_from_slice(&a);
    }
    Ok((a, err))
}

/// Inverse-filters `h` by `a`, keeping the input length.
pub fn residual(h: &[f64], a: &[f64]) -> Vec<f64> {
    (0..h.len())
        .map(|n| {
            a.iter()
                .enumerate()
                .take(n + 1)
                .map(|(k, &ak)| ak * h[n - k])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocorrelation_of_impulse() {
        let mut h = vec![0.0; 10];
        h[3] = 2.0;
        let r = autocorrelation(&h);
        assert!((r[0] - 0.4).abs() < 1e-15);
        assert!(r[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn levinson_recovers_ar1() {
        // AR(1) autocorrelation rho^k gives a = [1, -rho].
        let rho: f64 = 0.7;
        let r: Vec<f64> = (0..6).map(|k| rho.powi(k)).collect();
        let (a, err) = levinson_durbin(&r, 3).unwrap();
        assert!((a[1] + rho).abs() < 1e-12);
        assert!(a[2].abs() < 1e-12 && a[3].abs() < 1e-12);
        assert!((err - (1.0 - rho * rho)).abs() < 1e-12);
    }

    #[test]
    fn levinson_rejects_zero_energy() {
        assert!(matches!(
            levinson_durbin(&[0.0; 5], 2),
            Err(NotchError::SingularToeplitz { stage: 0 })
        ));
    }

    #[test]
    fn levinson_matches_normal_equations() {
        let r = [2.0, 1.1, 0.3, -0.2, 0.05];
        let (a, _) = levinson_durbin(&r, 4).unwrap();
        // sum_j a_j r[|i-j|] = 0 for i = 1..=p.
        for i in 1..=4usize {
            let s: f64 = (0..=4usize).map(|j| a[j] * r[i.abs_diff(j)]).sum();
            assert!(s.abs() < 1e-12, "row {i}: {s}");
        }
    }

    #[test]
    fn residual_is_fir_filtering() {
        let h = [1.0, 2.0, 3.0];
        assert_eq!(residual(&h, &[1.0, -1.0]), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn half_hann_shape() {
        let w = half_hann(4);
        assert_eq!(w[0], 1.0);
        assert!((w[2] - 0.5).abs() < 1e-15);
        assert!(w.windows(2).all(|p| p[1] < p[0]));
    }
}
