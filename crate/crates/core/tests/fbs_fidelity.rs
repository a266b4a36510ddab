use std::f64::consts::PI;

use hrtf_core::dsp::HrirRecord;
use hrtf_core::fbs::{self, bessel_j, bessel_zeros, discrete_orthogonality, FbsConfig, FbsModel, FitMethod};
use hrtf_core::synth;
use num_complex::Complex64;

const FS: f64 = 44100.0;
const N: usize = 512;

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn generator(seed: u64) -> FbsModel {
    synth::bandlimited_model(&mut synth::rng(seed), 5, 1, 30, FS).unwrap()
}

#[test]
fn bandlimited_circle_fit() {
    let truth = generator(11);
    let (records, thetas) = synth::sample_circle(&truth, 36, N).unwrap();
    let model = fbs::fbs_fit(&records, &thetas, &FbsConfig::default()).unwrap();
    assert!(model.fit_residual < 1e-6, "{}", model.fit_residual);
    let eval = model.evaluator(N).unwrap();
    for (r, &t) in records.iter().zip(&thetas) {
        assert!(rel_l2(&eval.hrir(t), r.samples()) < 1e-6);
    }
    let truth_eval = truth.evaluator(N).unwrap();
    for j in 0..72 {
        let t = (j as f64 * 5.0 + 2.5).to_radians();
        let e = rel_l2(&eval.hrir(t), &truth_eval.hrir(t));
        assert!(e < 1e-3, "angle {t}: {e}");
    }
}

#[test]
fn projection_fit_is_close_on_smooth_data() {
    let truth = generator(12);
    let (records, thetas) = synth::sample_circle(&truth, 36, N).unwrap();
    let cfg = FbsConfig {
        method: FitMethod::Projection,
        ..FbsConfig::default()
    };
    let model = fbs::fbs_fit(&records, &thetas, &cfg).unwrap();
    assert!(model.fit_residual < 0.1, "{}", model.fit_residual);
}

#[test]
fn bessel_discrete_orthogonality() {
    for l in [0usize, 1, 2, 5, 10] {
        let z = bessel_zeros(l, 30).unwrap();
        for k in 1..=30 {
            for k2 in [k, k % 30 + 1, (k + 7) % 30 + 1] {
                let s = discrete_orthogonality(l, k, k2, 2048).unwrap();
                if k == k2 {
                    let want = bessel_j(l + 1, z[k - 1]).unwrap().powi(2) / 2.0;
                    assert!((s - want).abs() < 0.01 * want, "l={l} k={k}");
                } else {
                    assert!(s.abs() < 1e-3, "l={l} k={k} k2={k2}: {s}");
                }
            }
        }
    }
}

#[test]
fn single_basis_function_is_recovered() {
    let mut truth = FbsModel::zeros_like(2, 1, 3, FS / 2.0, FS).unwrap();
    truth.set_coeff(2, 3, Complex64::new(1.0, 0.0)).unwrap();
    let (records, thetas) = synth::sample_circle(&truth, 36, N).unwrap();
    let model = fbs::fbs_fit(&records, &thetas, &FbsConfig::default()).unwrap();
    let target = model.coeff(2, 3).unwrap();
    assert!((target - 1.0).norm() < 1e-6);
    for m in -10i64..=10 {
        for k in 1..=70 {
            if (m, k) != (2, 3) {
                assert!(model.coeff(m, k).unwrap().norm() < 1e-3 * target.norm(), "({m}, {k})");
            }
        }
    }
}

#[test]
fn angle_independent_data_has_only_m_zero() {
    let rec = HrirRecord::new(synth::min_phase_body(N, FS), FS).unwrap();
    let thetas: Vec<f64> = (0..24).map(|j| 2.0 * PI * j as f64 / 24.0).collect();
    let records = vec![rec; 24];
    let model = fbs::fbs_fit(&records, &thetas, &FbsConfig::default()).unwrap();
    let scale = (1..=70).map(|k| model.coeff(0, k).unwrap().norm()).fold(0.0, f64::max);
    for m in (-10i64..=10).filter(|&m| m != 0) {
        for k in 1..=70 {
            assert!(model.coeff(m, k).unwrap().norm() <= 1e-10 * scale);
        }
    }
    let eval = model.evaluator(N).unwrap();
    let a = eval.hrir(0.3);
    let b = eval.hrir(4.0);
    assert!(rel_l2(&a, &b) < 1e-12);
}

#[test]
fn fit_is_linear() {
    let (r1, thetas) = synth::sample_circle(&generator(21), 36, N).unwrap();
    let (r2, _) = synth::sample_circle(&generator(22), 36, N).unwrap();
    let (a, b) = (0.7, -1.9);
    let mixed: Vec<HrirRecord> = r1
        .iter()
        .zip(&r2)
        .map(|(x, y)| {
            HrirRecord::new(x.samples().iter().zip(y.samples()).map(|(p, q)| a * p + b * q).collect(), FS).unwrap()
        })
        .collect();
    let cfg = FbsConfig::default();
    let m1 = fbs::fbs_fit(&r1, &thetas, &cfg).unwrap();
    let m2 = fbs::fbs_fit(&r2, &thetas, &cfg).unwrap();
    let mm = fbs::fbs_fit(&mixed, &thetas, &cfg).unwrap();
    let scale = mm.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    for ((p, q), r) in m1.coeffs().iter().zip(m2.coeffs()).zip(mm.coeffs()) {
        assert!((p * a + q * b - r).norm() <= 1e-10 * scale);
    }
}

#[test]
fn angular_shift_rotates_coefficients() {
    let (records, thetas) = synth::sample_circle(&generator(31), 36, N).unwrap();
    // Shifting by s grid steps: H'(theta_j) = H(theta_j - theta_s).
    let s = 3;
    let theta_s = thetas[s];
    let shifted: Vec<HrirRecord> = (0..36).map(|j| records[(j + 36 - s) % 36].clone()).collect();
    let cfg = FbsConfig::default();
    let m0 = fbs::fbs_fit(&records, &thetas, &cfg).unwrap();
    let m1 = fbs::fbs_fit(&shifted, &thetas, &cfg).unwrap();
    let scale = m0.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    for m in -10i64..=10 {
        for k in 1..=70 {
            let want = m0.coeff(m, k).unwrap() * Complex64::from_polar(1.0, -(m as f64) * theta_s);
            assert!((m1.coeff(m, k).unwrap() - want).norm() <= 1e-8 * scale);
        }
    }
}

#[test]
fn evaluation_is_periodic() {
    let truth = generator(41);
    for &t in &[0.0, 0.7, 3.3] {
        for &f in &[0.0, 1234.5, 9000.0, 22050.0] {
            let a = fbs::fbs_eval(&truth, f, t).unwrap();
            let b = fbs::fbs_eval(&truth, f, t + 2.0 * PI).unwrap();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
    let eval = truth.evaluator(N).unwrap();
    assert!(rel_l2(&eval.hrir(1.0), &eval.hrir(1.0 + 2.0 * PI)) < 1e-12);
}

#[test]
fn too_few_angles() {
    let (records, thetas) = synth::sample_circle(&generator(1), 20, N).unwrap();
    assert!(matches!(
        fbs::fbs_fit(&records, &thetas, &FbsConfig::default()),
        Err(fbs::FbsError::InsufficientAngles { n_grid: 20, m_max: 10 })
    ));
}
