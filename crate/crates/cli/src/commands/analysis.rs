use hrtf_core::dsp::{self, HrirRecord};
use hrtf_core::io::{self, fmt_f64, select_plane, Table};
use hrtf_core::model::{self, SweepConfig};
use hrtf_core::notch::{self, NotchConfig, NotchSource, TrajectoryRow};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{ClassifyArgs, DecomposeArgs, NotchesArgs};
use crate::util::{self, ear_str};
use crate::CliError;

struct Summary {
    round_trip: f64,
    additivity: f64,
    flatness: f64,
    delay: i64,
    min_ap_gd: f64,
    composite_notches: usize,
    all_pass_notches: usize,
}

fn summarize(h: &HrirRecord, d: &dsp::DecomposedHrtf, cfg: &NotchConfig) -> Result<Summary, CliError> {
    let c = model::classify_direction(h, cfg)?;
    Ok(Summary {
        round_trip: d.round_trip_error(),
        additivity: d.additivity_error(),
        flatness: d.all_pass_flatness(),
        delay: dsp::linear_phase_delay(&d.all_pass),
        min_ap_gd: c.min_ap_gd,
        composite_notches: notch::record_notches(h, NotchSource::Composite, cfg)?.len(),
        all_pass_notches: notch::record_notches(h, NotchSource::AllPass, cfg)?.len(),
    })
}

pub fn decompose(a: DecomposeArgs) -> Result<(), CliError> {
    let cfg = a.notch.config();
    cfg.validate()?;
    let sel = a.select.select()?;
    if let [h] = sel.records.as_slice() {
        let d = dsp::decompose(h)?;
        let s = summarize(h, &d, &cfg)?;
        let lp_ap = notch::all_pass_curve(&d.all_pass, &cfg)?;
        let mask = d.valid_mask();
        let (mag, mag_min) = (d.composite.magnitude_db(), d.min_phase.magnitude_db());
        let mut t = Table::new([
            "bin",
            "freq_hz",
            "valid",
            "mag_db",
            "min_phase_mag_db",
            "gd_composite",
            "gd_min_phase",
            "gd_all_pass",
            "lpgd_all_pass",
        ]);
        for i in 0..=d.composite.len() / 2 {
            t.push(vec![
                i.to_string(),
                fmt_f64(d.composite.freq(i)),
                mask[i].to_string(),
                fmt_f64(mag[i]),
                fmt_f64(mag_min[i]),
                fmt_f64(d.gd_composite.values[i]),
                fmt_f64(d.gd_min.values[i]),
                fmt_f64(d.gd_ap.values[i]),
                fmt_f64(lp_ap.values[i]),
            ]);
        }
        if let Some(out) = &a.out {
            util::emit_table(Some(out), &t)?;
        }
        return util::summary(json!({
            "azimuth_deg": h.direction.azimuth_deg,
            "elevation_deg": h.direction.elevation_deg,
            "ear": ear_str(h.ear),
            "round_trip_error": s.round_trip,
            "additivity_error": s.additivity,
            "all_pass_flatness": s.flatness,
            "all_pass_flat": s.flatness < 1e-6,
            "linear_phase_delay": s.delay,
            "min_all_pass_gd": s.min_ap_gd,
            "composite_notches": s.composite_notches,
            "all_pass_notches": s.all_pass_notches,
        }));
    }
    let rows = sel
        .records
        .par_iter()
        .map(|h| {
            let d = dsp::decompose(h)?;
            summarize(h, &d, &cfg)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new([
        "azimuth_deg",
        "elevation_deg",
        "ear",
        "round_trip_error",
        "additivity_error",
        "all_pass_flatness",
        "linear_phase_delay",
        "min_all_pass_gd",
        "composite_notches",
        "all_pass_notches",
    ]);
    for (h, s) in sel.records.iter().zip(&rows) {
        t.push(vec![
            fmt_f64(h.direction.azimuth_deg),
            fmt_f64(h.direction.elevation_deg),
            ear_str(h.ear),
            fmt_f64(s.round_trip),
            fmt_f64(s.additivity),
            fmt_f64(s.flatness),
            s.delay.to_string(),
            fmt_f64(s.min_ap_gd),
            s.composite_notches.to_string(),
            s.all_pass_notches.to_string(),
        ]);
    }
    util::emit_table(a.out.as_deref(), &t)
}

pub fn notches(a: NotchesArgs) -> Result<(), CliError> {
    let cfg = a.notch.config();
    cfg.validate()?;
    let mut sel = a.select.select()?;
    // A trajectory runs over elevation at one azimuth and ear.
    if a.select.ear.is_none() {
        let first = sel.records[0].ear;
        sel.records.retain(|r| r.ear == first);
    }
    if a.select.azimuth.is_none() {
        let az = sel.records[0].direction.azimuth_deg;
        sel.records.retain(|r| r.direction.azimuth_deg == az);
    }
    let rows = sel
        .records
        .par_iter()
        .map(|r| {
            Ok(TrajectoryRow {
                elevation_deg: r.direction.elevation_deg,
                notches: notch::record_notches(r, a.source, &cfg)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = rows;
    rows.sort_by(|x, y| x.elevation_deg.total_cmp(&y.elevation_deg));
    util::emit_table(a.out.as_deref(), &notch::trajectory_table(&rows))
}

pub fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    let ncfg = a.notch.config();
    ncfg.validate()?;
    let ds = io::load_dataset(&a.dataset)?;
    util::warn_all(&ds.warnings);
    let map = match a.plane {
        Some(plane) => {
            let circle = select_plane(&ds, plane, a.ear)?;
            let cfg = SweepConfig {
                step_deg: a.step_deg,
                notch: ncfg,
                fbs: a.fbs.config(),
                radial: a.radial,
            };
            model::build_pure_map(&circle, ds.coordinate_system, &cfg)?
        }
        None => {
            let records: Vec<HrirRecord> = ds.records.iter().filter(|r| r.ear == a.ear).cloned().collect();
            model::classify_records(&records, ds.coordinate_system, &ncfg, a.step_deg)?
        }
    };
    model::save_map(&map, &a.out)?;
    if let Some(t) = &a.table {
        util::emit_table(Some(t), &map.to_table())?;
    }
    util::summary(json!({
        "entries": map.entries.len(),
        "pure": map.pure_count(),
        "min_phase_allpass": map.entries.len() - map.pure_count(),
    }))
}
