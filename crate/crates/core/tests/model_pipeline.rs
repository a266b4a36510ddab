use hrtf_core::dsp::{fft, CoordinateSystem, Direction, Ear, HrirRecord};
use hrtf_core::eval;
use hrtf_core::io::{select_plane, Plane};
use hrtf_core::model::{self, DirectionClass, Flavor, ModelConfig, ReconstructionMode, SweepConfig};
use hrtf_core::notch::{self, NotchConfig, NotchSource};
use hrtf_core::synth;

const FS: f64 = 44100.0;

fn record(samples: Vec<f64>) -> HrirRecord {
    HrirRecord::new(samples, FS).unwrap()
}

fn apf_hrir(n: usize) -> HrirRecord {
    record(synth::min_phase_with_apf(n, FS, 5, 0.96, 6991.0).unwrap())
}

#[test]
fn constructed_directions_are_classified() {
    let cfg = NotchConfig::default();
    for &n in &[200usize, 256, 512] {
        let pure = record(synth::min_phase_body(n, FS));
        assert_eq!(model::classify_direction(&pure, &cfg).unwrap().class, DirectionClass::PureMinPhase);
        let c = model::classify_direction(&apf_hrir(n), &cfg).unwrap();
        assert_eq!(c.class, DirectionClass::MinPhaseAllpass);
        let bin = c.min_bin.unwrap() as f64;
        assert!((bin - 6991.0 * n as f64 / FS).abs() <= 2.0);
    }
}

#[test]
fn m_hrtf_beats_min_pd_on_an_all_pass_direction() {
    let mc = ModelConfig::default();
    for &n in &[200usize, 512] {
        let h = apf_hrir(n);
        let m = model::reconstruct_with(&h, false, ReconstructionMode::MHrtf, &mc).unwrap();
        let p = model::reconstruct_with(&h, false, ReconstructionMode::MinPd, &mc).unwrap();
        assert_eq!(m.flavor, Flavor::MinPhaseAllpass);
        assert_eq!(p.flavor, Flavor::MinPdBaseline);
        let spec = m.apf.unwrap();
        assert!((spec.f0 - 6991.0).abs() <= 2.0 * FS / n as f64);
        let hm = model::model_to_hrir(&m, n).unwrap();
        let hp = model::model_to_hrir(&p, n).unwrap();
        let d = eval::psi_d(h.samples(), hm.samples(), hp.samples(), n).unwrap();
        assert!(d > 0.0, "n={n}: {d}");
    }
}

#[test]
fn m_hrtf_keeps_the_all_pass_notch() {
    let n = 256;
    let h = apf_hrir(n);
    let cfg = NotchConfig::default();
    let mc = ModelConfig::default();
    let apf_notches = |r: &HrirRecord| notch::record_notches(r, NotchSource::AllPass, &cfg).unwrap();
    let target = apf_notches(&h)
        .into_iter()
        .min_by(|a, b| a.depth.total_cmp(&b.depth))
        .expect("all-pass notch in the input");
    let m = model::reconstruct_with(&h, false, ReconstructionMode::MHrtf, &mc).unwrap();
    let hm = model::model_to_hrir(&m, n).unwrap();
    let found = apf_notches(&hm)
        .into_iter()
        .filter(|x| x.bin_index.abs_diff(target.bin_index) <= 2)
        .min_by(|a, b| a.depth.total_cmp(&b.depth))
        .expect("notch kept");
    assert!((found.depth - target.depth).abs() <= 0.2 * target.depth.abs(), "{} vs {}", found.depth, target.depth);

    let p = model::reconstruct_with(&h, false, ReconstructionMode::MinPd, &mc).unwrap();
    let hp = model::model_to_hrir(&p, n).unwrap();
    let lost = apf_notches(&hp);
    assert!(lost.iter().all(|x| x.depth > 0.5 * target.depth), "{lost:?}");
}

#[test]
fn pure_direction_modes_agree() {
    let h = record(synth::min_phase_body(200, FS));
    let mc = ModelConfig::default();
    let a = model::reconstruct_with(&h, true, ReconstructionMode::MHrtf, &mc).unwrap();
    let b = model::reconstruct_with(&h, true, ReconstructionMode::MinPd, &mc).unwrap();
    assert_eq!(a.flavor, Flavor::PureMinPhase);
    assert_eq!(
        model::model_to_hrir(&a, 200).unwrap().samples(),
        model::model_to_hrir(&b, 200).unwrap().samples()
    );
}

#[test]
fn time_domain_model_matches_its_spectrum() {
    let n = 200;
    let h = apf_hrir(n);
    let m = model::reconstruct_with(&h, false, ReconstructionMode::MHrtf, &ModelConfig::default()).unwrap();
    // A long output sampled every k-th bin sees the model on its own grid.
    let k = 16;
    let long = model::model_to_hrir(&m, k * n).unwrap();
    let dft = fft::rfft(long.samples());
    let spec = m.spectrum();
    for i in 0..n {
        let e = (dft[k * i] - spec.bins[i]).norm() / spec.bins[i].norm();
        assert!(e < 1e-6, "bin {i}: {e}");
    }
    // The short output must report its truncation.
    assert!(matches!(
        model::model_to_hrir(&m, 64),
        Err(model::ModelError::TailTruncationLoss { .. })
    ));
}

#[test]
fn onset_sets_the_delay() {
    let body = synth::min_phase_body(100, FS);
    for d in [0usize, 3, 17] {
        let mut s = vec![0.0; d];
        s.extend_from_slice(&body);
        s.truncate(100);
        let m = model::reconstruct_with(&record(s), true, ReconstructionMode::MinPd, &ModelConfig::default()).unwrap();
        assert_eq!(m.t_d, d);
    }
}

fn non_pure_span(m_max: usize) -> (model::PureMinPhaseMap, f64, f64) {
    let ds = synth::injected_apf_circle(200, FS, 10.0).unwrap();
    let circle = select_plane(&ds, Plane::Median, Ear::Left).unwrap();
    assert_eq!(circle.len(), 36);
    let mut cfg = SweepConfig::default();
    cfg.fbs.m_max = m_max;
    let map = model::build_pure_map(&circle, CoordinateSystem::InterauralPolar, &cfg).unwrap();
    assert_eq!(map.entries.len(), 360);
    let non_pure: Vec<usize> = (0..360).filter(|&j| !map.entries[j].is_pure).collect();
    // One contiguous run.
    assert!(non_pure.windows(2).all(|w| w[1] == w[0] + 1), "{non_pure:?}");
    let (first, last) = (non_pure[0] as f64, *non_pure.last().unwrap() as f64);
    (map, first, last)
}

#[test]
fn pure_map_boundary_follows_the_injection() {
    let (lo, hi) = synth::INJECTED_RANGE_DEG;
    let (map, first, last) = non_pure_span(10);
    // Every injected grid point is non-pure, and nothing a full grid
    // spacing (10 deg) away from them is.
    for (j, e) in map.entries.iter().enumerate() {
        let theta = j as f64;
        if (lo..=hi).contains(&theta) {
            assert!(!e.is_pure, "theta {theta} should carry the all-pass notch ({})", e.min_ap_gd);
        }
        if theta < lo - 10.0 || theta > hi + 10.0 {
            assert!(e.is_pure, "theta {theta} should be pure ({})", e.min_ap_gd);
        }
    }
    assert!(map.contains(Direction::new(0.0, -90.0)));
    assert!(!map.contains(Direction::new(0.0, 45.0)));
    assert!((first - (lo - 5.0)).abs() <= 7.0, "first {first}");
    assert!((last - (hi + 5.0)).abs() <= 7.0, "last {last}");
}

#[test]
fn higher_angular_order_sharpens_the_boundary() {
    let (lo, hi) = synth::INJECTED_RANGE_DEG;
    let (_, first, last) = non_pure_span(17);
    // Switch within two sweep steps of the grid midpoints.
    assert!((first - (lo - 5.0)).abs() <= 2.0 + 1.0, "first {first}");
    assert!((last - (hi + 5.0)).abs() <= 2.0 + 1.0, "last {last}");
}
