use hrtf_core::dsp::HrirRecord;
use hrtf_core::io::Table;
use hrtf_core::notch::{self, Notch, NotchConfig, NotchSource};
use hrtf_core::synth;
use proptest::prelude::*;

const FS: f64 = 44100.0;

fn deepest(notches: &[Notch]) -> &Notch {
    notches
        .iter()
        .min_by(|a, b| a.depth.total_cmp(&b.depth))
        .expect("at least one notch")
}

#[test]
fn zero_pair_notch_is_found_at_its_bin() {
    let cfg = NotchConfig::default();
    for &n in &[200usize, 256, 512] {
        let h = HrirRecord::new(synth::zero_pair_notch(n, FS, 8000.0, 0.98), FS).unwrap();
        let expected = 8000.0 * n as f64 / FS;
        for source in [NotchSource::Composite, NotchSource::MinPhase] {
            let found = notch::record_notches(&h, source, &cfg).unwrap();
            let d = deepest(&found);
            assert!((d.bin_index as f64 - expected).abs() <= 2.0, "n={n} {source:?}: bin {}", d.bin_index);
            assert!(d.depth < -10.0);
            assert_eq!(d.source, source);
        }
        // A minimum-phase zero leaves nothing in the all-pass factor once the
        // DFT is long enough for the cepstrum (decaying as 0.98^n) not to alias.
        if n >= 512 {
            assert!(notch::record_notches(&h, NotchSource::AllPass, &cfg).unwrap().is_empty());
        }
    }
}

#[test]
fn sweep_moves_monotonically() {
    let elevations: Vec<f64> = (0..28).map(|i| -45.0 + 5.0 * i as f64).collect();
    let records = synth::notch_sweep(256, FS, &elevations, 6000.0, 11000.0, 0.98).unwrap();
    let rows = notch::notch_trajectory(&records, &NotchConfig::default(), NotchSource::Composite).unwrap();
    let bins: Vec<usize> = rows.iter().map(|r| deepest(&r.notches).bin_index).collect();
    for (i, &b) in bins.iter().enumerate() {
        let f0 = 6000.0 + 5000.0 * i as f64 / 27.0;
        assert!((b as f64 - f0 * 256.0 / FS).abs() <= 2.0, "row {i}: bin {b}");
    }
    assert!(bins.windows(2).all(|w| w[1] >= w[0]), "{bins:?}");
}

#[test]
fn trajectory_table_round_trips() {
    let elevations = [0.0, 10.0, 20.0];
    let records = synth::notch_sweep(200, FS, &elevations, 7000.0, 9000.0, 0.98).unwrap();
    let rows = notch::notch_trajectory(&records, &NotchConfig::default(), NotchSource::Composite).unwrap();
    let t = notch::trajectory_table(&rows);
    assert_eq!(t.len(), rows.iter().map(|r| r.notches.len()).sum::<usize>());
    let back = Table::read_from(t.to_csv_string().as_bytes()).unwrap();
    assert_eq!(back, t);
    let col = back.column("depth_samples").unwrap();
    let parsed: Vec<f64> = back.rows.iter().map(|r| r[col].parse().unwrap()).collect();
    let orig: Vec<f64> = rows.iter().flat_map(|r| r.notches.iter().map(|n| n.depth)).collect();
    assert_eq!(parsed, orig);
}

#[test]
fn mixed_azimuths_are_rejected() {
    let mut records = synth::notch_sweep(200, FS, &[0.0, 10.0], 7000.0, 9000.0, 0.98).unwrap();
    records[1].direction.azimuth_deg = 20.0;
    assert!(matches!(
        notch::notch_trajectory(&records, &NotchConfig::default(), NotchSource::Composite),
        Err(notch::NotchError::MixedPlane(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn notches_are_scale_invariant(k in -20i32..20, f0 in 3000.0f64..15000.0) {
        let g = 2f64.powi(k) * 1.37;
        let h = synth::zero_pair_notch(256, FS, f0, 0.97);
        let a = HrirRecord::new(h.clone(), FS).unwrap();
        let b = HrirRecord::new(h.iter().map(|v| v * g).collect(), FS).unwrap();
        let cfg = NotchConfig::default();
        let na: Vec<usize> = notch::record_notches(&a, NotchSource::Composite, &cfg).unwrap().iter().map(|n| n.bin_index).collect();
        let nb: Vec<usize> = notch::record_notches(&b, NotchSource::Composite, &cfg).unwrap().iter().map(|n| n.bin_index).collect();
        prop_assert_eq!(na, nb);
    }

    #[test]
    fn notches_sorted_separated_and_below_threshold(seed in any::<u64>()) {
        let h = HrirRecord::new(synth::random_hrir(&mut synth::rng(seed), 200), FS).unwrap();
        let cfg = NotchConfig::default();
        let found = notch::record_notches(&h, NotchSource::Composite, &cfg).unwrap();
        for w in found.windows(2) {
            prop_assert!(w[1].frequency_hz > w[0].frequency_hz);
            prop_assert!(w[1].frequency_hz - w[0].frequency_hz >= cfg.min_separation_hz);
        }
        prop_assert!(found.iter().all(|n| n.depth < cfg.threshold && n.bin_index >= 1 && n.bin_index <= 99));
    }
}
