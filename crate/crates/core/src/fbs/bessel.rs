//! Bessel functions of the first kind and their positive zeros.

use super::FbsError;

pub const MAX_ORDER: usize = 64;
pub const MAX_ZEROS: usize = 128;
/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARG: f64 = 1e5;

const RESCALE: f64 = 1e250;

fn check(n: usize, x: f64) -> Result<(), FbsError> {
    if n > MAX_ORDER {
        return Err(FbsError::OrderOverflow { n });
    }
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(FbsError::ArgumentOutOfRange { x });
    }
    Ok(())
}

/// Ascending series, used for `x <= 1` where it converges in a few terms.
fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= h / i as f64;
    }
    let mut sum = term;
    let q = -h * h;
    for m in 1..60 {
        term *= q / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J0 + 2 sum J_2k = 1`.
/// Returns `J_0..=J_nmax`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let start = nmax.max(x as usize) + 32 + (12.0 * x.cbrt()) as usize;
    let start = start + start % 2;
    let mut out = vec![0.0; nmax + 1];
    let (mut jp1, mut j) = (0.0, 1e-300);
    let mut norm = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        // j = J_k, jp1 = J_{k+1} (unnormalized).
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            norm += 2.0 * j;
        }
        let jm1 = k as f64 * two_over_x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp1 /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
    }
    out[0] = j;
    norm += j;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `J_n(x)` for `0 <= n <= 64`, `0 <= x <= 1e5`, absolute error below 1e-10.
pub fn bessel_j(n: usize, x: f64) -> Result<f64, FbsError> {
    check(n, x)?;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x <= 1.0 {
        return Ok(series(n, x));
    }
    Ok(miller(n, x)[n])
}

/// `J_0(x) ..= J_nmax(x)` from one recurrence.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>, FbsError> {
    check(nmax, x)?;
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    if x <= 1.0 {
        return Ok((0..=nmax).map(|n| series(n, x)).collect());
    }
    Ok(miller(nmax, x))
}

fn j_and_derivative(n: usize, x: f64) -> Result<(f64, f64), FbsError> {
    check(n, x)?;
    let v = if x <= 1.0 {
        vec![0.0; n].into_iter().chain([series(n, x), series(n + 1, x)]).collect()
    } else {
        miller(n + 1, x)
    };
    // J_n' = (n/x) J_n - J_{n+1}
    Ok((v[n], n as f64 / x * v[n] - v[n + 1]))
}

fn refine(n: usize, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64, FbsError> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = j_and_derivative(n, x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(FbsError::ConvergenceFailure { n, near: x })
}

/// First `count` positive zeros of `J_n`, increasing.
pub fn bessel_zeros(n: usize, count: usize) -> Result<Vec<f64>, FbsError> {
    if count > MAX_ZEROS {
        return Err(FbsError::TooManyZeros { count });
    }
    if n > MAX_ORDER {
        return Err(FbsError::OrderOverflow { n });
    }
    // Zeros of J_n are more than 2.9 apart and the first exceeds n.
    const STEP: f64 = 0.5;
    let mut zeros = Vec::with_capacity(count);
    let mut a = (n as f64).max(STEP);
    let mut fa = bessel_j(n, a)?;
    let mut iterations = 0usize;
    while zeros.len() < count {
        let b = a + STEP;
        let fb = bessel_j(n, b)?;
        if fa == 0.0 {
            zeros.push(a);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            zeros.push(refine(n, a, b, fa)?);
        }
        a = b;
        fa = fb;
        iterations += 1;
        if iterations > 1_000_000 {
            return Err(FbsError::ConvergenceFailure { n, near: a });
        }
    }
    Ok(zeros)
}

/// `sum_i x_i J_l(b_k x_i) J_l(b_k2 x_i) dx` on `points` midpoints of (0, 1].
pub fn discrete_orthogonality(order: usize, k: usize, k2: usize, points: usize) -> Result<f64, FbsError> {
    let z = bessel_zeros(order, k.max(k2))?;
    let (bk, bk2) = (z[k - 1], z[k2 - 1]);
    let dx = 1.0 / points as f64;
    let mut s = 0.0;
    for i in 0..points {
        let x = (i as f64 + 0.5) * dx;
        s += x * bessel_j(order, bk * x)? * bessel_j(order, bk2 * x)? * dx;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for n in 1..10 {
            assert_eq!(bessel_j(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn reference_values() {
        // scipy.special.jv
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_5),
            (0, 5.0, -0.177_596_771_314_338_3),
            (1, 10.0, 0.043_472_746_168_861_44),
            (2, 3.0, 0.486_091_260_585_891_1),
            (5, 1.5, 0.001_799_421_767_360_612_6),
        ];
        for (n, x, want) in cases {
            let got = bessel_j(n, x).unwrap();
            assert!((got - want).abs() < 1e-12, "J_{n}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        for n in 0..20 {
            let x = 1.0;
            let a = series(n, x);
            let b = miller(n, x)[n];
            assert!((a - b).abs() < 1e-14, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(bessel_j(65, 1.0), Err(FbsError::OrderOverflow { n: 65 })));
        assert!(matches!(bessel_j(0, -1.0), Err(FbsError::ArgumentOutOfRange { .. })));
        assert!(matches!(bessel_zeros(0, 129), Err(FbsError::TooManyZeros { .. })));
    }

    #[test]
    fn first_zeros() {
        let z = bessel_zeros(0, 3).unwrap();
        let want = [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_013];
        for (a, b) in z.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((bessel_zeros(1, 1).unwrap()[0] - 3.831_705_970_207_512).abs() < 1e-12);
    }
}
