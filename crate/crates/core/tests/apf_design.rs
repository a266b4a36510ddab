use std::f64::consts::PI;

use hrtf_core::apf::{self, ApfSpec};
use hrtf_core::dsp;
use proptest::prelude::*;

const FS: f64 = 44100.0;

#[test]
fn impulse_response_group_delay_matches_closed_form() {
    for &r in &[0.1, 0.5, 0.8, 0.9, 0.96] {
        for &f0 in &[500.0, 3000.0, 6991.0, 15000.0] {
            let spec = ApfSpec::new(r, f0, FS).unwrap();
            let mut taps = apf::impulse_response(&spec, 1e-12).taps;
            assert!(taps.len() <= 4096);
            taps.resize(4096, 0.0);
            let gd = dsp::group_delay(&taps, FS).unwrap();
            for k in 0..=2048 {
                let w = 2.0 * PI * k as f64 / 4096.0;
                let e = (gd.values[k] - apf::apf_group_delay(&spec, w)).abs();
                assert!(e < 1e-3, "r={r} f0={f0} bin {k}: {e}");
            }
        }
    }
}

#[test]
fn peak_delay_for_the_reference_filter() {
    let spec = ApfSpec::new(0.96, 6991.0, FS).unwrap();
    let tau = spec.peak_delay();
    assert!((tau - 49.03).abs() < 0.05, "{tau}");
    let at_peak = apf::apf_group_delay(&spec, spec.theta0());
    assert!((tau - at_peak).abs() < 1e-9);
}

#[test]
fn solve_r_round_trip() {
    for &r in &[0.05, 0.3, 0.6, 0.9, 0.96, 0.999] {
        for &f0 in &[1000.0, 6991.0, 12000.0] {
            let theta0 = 2.0 * PI * f0 / FS;
            let back = apf::solve_r(f0, FS, apf::peak_delay(r, theta0)).unwrap();
            assert!((back - r).abs() < 1e-8, "r={r} f0={f0}: {back}");
        }
    }
}

#[test]
fn transfer_is_all_pass_with_conjugate_reciprocal_zeros() {
    let spec = ApfSpec::new(0.9, 4000.0, FS).unwrap();
    for k in 0..64 {
        let w = PI * k as f64 / 63.0;
        assert!((apf::apf_transfer(&spec, w).norm() - 1.0).abs() < 1e-12);
    }
    for (p, z) in spec.poles().iter().zip(spec.zeros()) {
        assert!((z - 1.0 / p.conj()).norm() < 1e-12);
    }
}

proptest! {
    #[test]
    fn phase_derivative_is_group_delay(r in 0.0f64..0.97, f0 in 50.0f64..21000.0, w in 0.01f64..3.1) {
        let spec = ApfSpec::new(r, f0, FS).unwrap();
        let h = 1e-6;
        let d = -(apf::apf_phase(&spec, w + h) - apf::apf_phase(&spec, w - h)) / (2.0 * h);
        prop_assert!((d - apf::apf_group_delay(&spec, w)).abs() < 1e-4 * d.abs().max(1.0));
    }

    #[test]
    fn group_delay_positive_and_peaks_near_theta0(r in 0.8f64..0.99, f0 in 3000.0f64..18000.0) {
        let spec = ApfSpec::new(r, f0, FS).unwrap();
        let t0 = spec.theta0();
        let peak = apf::apf_group_delay(&spec, t0);
        for k in 0..200 {
            let w = PI * k as f64 / 199.0;
            let g = apf::apf_group_delay(&spec, w);
            prop_assert!(g > 0.0);
            if (w - t0).abs() > 0.2 {
                prop_assert!(g < peak);
            }
        }
    }

    #[test]
    fn solve_r_is_monotone(f0 in 100.0f64..20000.0, a in 3.0f64..200.0, b in 3.0f64..200.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r_lo = apf::solve_r(f0, FS, lo).unwrap();
        let r_hi = apf::solve_r(f0, FS, hi).unwrap();
        prop_assert!(r_lo <= r_hi);
    }
}

#[test]
fn solve_r_rejects_out_of_range_targets() {
    assert!(matches!(
        apf::solve_r(6991.0, FS, 1.5),
        Err(apf::ApfError::TargetTooSmall { .. })
    ));
    assert!(matches!(
        apf::solve_r(6991.0, FS, 1e12),
        Err(apf::ApfError::TargetTooLarge { .. })
    ));
    assert!(apf::solve_r(0.0, FS, 10.0).is_err());
    assert!(apf::solve_r(30000.0, FS, 10.0).is_err());
}
