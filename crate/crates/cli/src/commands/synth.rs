use hrtf_core::dsp::{CoordinateSystem, Direction, Ear, HrirRecord};
use hrtf_core::io::{self, wav, Dataset, Plane};
use hrtf_core::render::Trajectory;
use hrtf_core::synth;
use serde_json::json;

use crate::args::{SynthArgs, SynthKind};
use crate::util;
use crate::CliError;

fn grid_count(step_deg: f64) -> Result<usize, CliError> {
    let count = 360.0 / step_deg;
    if !(step_deg > 0.0) || (count - count.round()).abs() > 1e-9 {
        return Err(CliError::Usage(format!("--step-deg must divide 360, got {step_deg}")));
    }
    Ok(count.round() as usize)
}

fn median_circle(count: usize, mut make: impl FnMut(usize, Ear) -> Result<Vec<f64>, CliError>, fs: f64) -> Result<Vec<HrirRecord>, CliError> {
    let cs = CoordinateSystem::InterauralPolar;
    let mut out = Vec::with_capacity(2 * count);
    for j in 0..count {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
        let d = Plane::Median.direction_at(theta, cs);
        for ear in [Ear::Left, Ear::Right] {
            out.push(HrirRecord::new(make(j, ear)?, fs)?.with_direction(d).with_ear(ear));
        }
    }
    Ok(out)
}

fn dataset(a: &SynthArgs) -> Result<Dataset, CliError> {
    let (n, fs) = (a.length as usize, a.fs);
    let cs = CoordinateSystem::InterauralPolar;
    let ds = match a.kind {
        SynthKind::InjectedApf => synth::injected_apf_circle(n, fs, a.step_deg)?,
        SynthKind::Horizontal => synth::horizontal_circle(n, fs, a.step_deg)?,
        SynthKind::Bandlimited => {
            let count = grid_count(a.step_deg)?;
            let mut rng = synth::rng(a.seed);
            let left = synth::bandlimited_model(&mut rng, a.m_max, 1, 70, fs)?;
            let right = synth::bandlimited_model(&mut rng, a.m_max, 1, 70, fs)?;
            let (l, _) = synth::sample_circle(&left, count, n)?;
            let (r, _) = synth::sample_circle(&right, count, n)?;
            let records = median_circle(count, |j, ear| Ok(if ear == Ear::Left { &l } else { &r }[j].samples().to_vec()), fs)?;
            Dataset::new("bandlimited", cs, records)?
        }
        SynthKind::Random => {
            let count = grid_count(a.step_deg)?;
            let mut rng = synth::rng(a.seed);
            let records = median_circle(count, |_, _| Ok(synth::random_hrir(&mut rng, n)), fs)?;
            Dataset::new("random", cs, records)?
        }
        SynthKind::NotchSweep => {
            let elevations: Vec<f64> = (0..50).map(|i| -45.0 + 5.625 * i as f64).collect();
            let records = synth::notch_sweep(n, fs, &elevations, 5000.0, 12000.0, 0.95)?;
            Dataset::new("notch-sweep", cs, records)?
        }
        SynthKind::Constructed => {
            let parts = [
                (Direction::new(0.0, 0.0), synth::min_phase_body(n, fs)),
                (Direction::new(0.0, 45.0), synth::zero_pair_notch(n, fs, 8000.0, 0.98)),
                (Direction::new(0.0, 90.0), synth::min_phase_with_apf(n, fs, 5, 0.96, 6991.0)?),
            ];
            let mut records = Vec::new();
            for (d, h) in parts {
                records.push(HrirRecord::new(h, fs)?.with_direction(d).with_ear(Ear::Left));
            }
            Dataset::new("constructed", cs, records)?
        }
        SynthKind::Noise | SynthKind::Trajectory => unreachable!("not a dataset kind"),
    };
    Ok(ds)
}

fn frames(a: &SynthArgs) -> Result<usize, CliError> {
    let f = (a.seconds * a.fs).round();
    if !(f >= 1.0) {
        return Err(CliError::Usage(format!("duration {} s at {} Hz has no samples", a.seconds, a.fs)));
    }
    Ok(f as usize)
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    match a.kind {
        SynthKind::Noise => {
            let len = frames(&a)?;
            let x = synth::noise(&mut synth::rng(a.seed), len, a.amplitude);
            let fs = a.fs.round() as u32;
            wav::write_wav(&a.out, &wav::Audio::mono(fs, x), wav::SampleFormat::Float32)?;
            util::summary(json!({ "kind": "noise", "frames": len }))
        }
        SynthKind::Trajectory => {
            let len = frames(&a)?;
            let steps = ((360.0 / a.step_deg).round() as usize).clamp(1, len);
            let t = Trajectory::azimuth_sweep(len, Direction::new(0.0, a.elevation), a.step_deg, steps)?;
            t.to_table().write_path(&a.out)?;
            util::summary(json!({ "kind": "trajectory", "points": steps }))
        }
        _ => {
            let ds = dataset(&a)?;
            io::save_dataset(&ds, &a.out)?;
            util::summary(json!({
                "kind": ds.name,
                "records": ds.records.len(),
                "hrir_length": ds.hrir_length,
                "coordinate_system": util::cs_str(ds.coordinate_system),
            }))
        }
    }
}
