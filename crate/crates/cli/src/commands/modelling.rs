use hrtf_core::apf::{self, ApfDesign, ApfSpec};
use hrtf_core::dsp::HrirRecord;
use hrtf_core::io::{self, fmt_f64, Dataset, Table};
use hrtf_core::model::{self, DirectionClass, ModelConfig, ModelError, ReconstructionMode, ReconstructionModel};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{DesignApfArgs, MissingNotch, ReconstructArgs, TextFormat};
use crate::util::{self, ear_str};
use crate::CliError;

fn fmt_c(re: f64, im: f64) -> String {
    if im < 0.0 {
        format!("{}-{}j", fmt_f64(re), fmt_f64(-im))
    } else {
        format!("{}+{}j", fmt_f64(re), fmt_f64(im))
    }
}

pub fn design_apf(a: DesignApfArgs) -> Result<(), CliError> {
    let t = &a.target;
    let r = match (t.r, t.depth, t.tau) {
        (Some(r), _, _) => r,
        (_, Some(d), _) => apf::solve_r(a.f0, a.fs, a.baseline + d.abs())?,
        (_, _, Some(tau)) => apf::solve_r(a.f0, a.fs, tau)?,
        _ => unreachable!("clap enforces one target"),
    };
    let spec = ApfSpec::new(r, a.f0, a.fs)?;
    let (poles, zeros) = (spec.poles(), spec.zeros());
    let (b, den) = spec.coefficients();
    let text = match a.format {
        TextFormat::Csv => {
            let mut tb = Table::new(["r", "theta0", "f0", "fs", "tau_peak", "poles", "zeros", "b", "a"]);
            let join = |v: &[f64; 3]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
            tb.push(vec![
                fmt_f64(spec.r),
                fmt_f64(spec.theta0()),
                fmt_f64(spec.f0),
                fmt_f64(spec.fs),
                fmt_f64(spec.peak_delay()),
                poles.iter().map(|c| fmt_c(c.re, c.im)).collect::<Vec<_>>().join(" "),
                zeros.iter().map(|c| fmt_c(c.re, c.im)).collect::<Vec<_>>().join(" "),
                join(&b),
                join(&den),
            ]);
            tb.to_csv_string()
        }
        TextFormat::Json => {
            format!(
                "{}\n",
                json!({
                    "r": spec.r,
                    "theta0": spec.theta0(),
                    "f0": spec.f0,
                    "fs": spec.fs,
                    "tau_peak": spec.peak_delay(),
                    "poles": poles.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                    "zeros": if r == 0.0 { serde_json::Value::Null } else { json!(zeros.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()) },
                    "b": b,
                    "a": den,
                })
            )
        }
    };
    util::emit(a.out.as_deref(), &text)?;
    if let Some(p) = &a.curve {
        if a.points < 2 {
            return Err(CliError::Usage("--points must be at least 2".into()));
        }
        let mut tb = Table::new(["freq_hz", "group_delay_samples"]);
        for i in 0..a.points {
            let w = std::f64::consts::PI * i as f64 / (a.points - 1) as f64;
            tb.push(vec![
                fmt_f64(w * a.fs / (2.0 * std::f64::consts::PI)),
                fmt_f64(apf::apf_group_delay(&spec, w)),
            ]);
        }
        util::emit_table(Some(p), &tb)?;
    }
    Ok(())
}

fn model_row(m: &ReconstructionModel) -> Vec<String> {
    let (r, f0, tau) = match &m.apf {
        Some(s) => (fmt_f64(s.r), fmt_f64(s.f0), fmt_f64(s.peak_delay())),
        None => (String::new(), String::new(), String::new()),
    };
    vec![
        fmt_f64(m.direction.azimuth_deg),
        fmt_f64(m.direction.elevation_deg),
        ear_str(m.ear),
        m.flavor.as_str().to_string(),
        m.t_d.to_string(),
        r,
        f0,
        tau,
        m.extra_notches.len().to_string(),
    ]
}

pub fn reconstruct(a: ReconstructArgs) -> Result<(), CliError> {
    let cfg = ModelConfig {
        notch: a.notch.config(),
        design: ApfDesign { baseline: a.baseline },
        ..ModelConfig::default()
    };
    cfg.notch.validate()?;
    let ds = io::load_dataset(&a.dataset)?;
    util::warn_all(&ds.warnings);
    let map = a.map.as_ref().map(model::load_map).transpose()?;
    let n = a.length.unwrap_or(ds.hrir_length);
    let records: Vec<&HrirRecord> = ds.records.iter().filter(|r| a.ear.is_none_or(|e| r.ear == e)).collect();
    if records.is_empty() {
        return Err(CliError::NoMatchingRecords(format!("no records in {}", a.dataset.display())));
    }
    let built = records
        .par_iter()
        .map(|h| {
            let pure = match (&map, a.mode) {
                (_, ReconstructionMode::MinPd) => false,
                (Some(m), _) => m.contains(h.direction),
                (None, _) => model::classify_direction(h, &cfg.notch)?.class == DirectionClass::PureMinPhase,
            };
            let m = match model::reconstruct_with(h, pure, a.mode, &cfg) {
                Err(ModelError::NoAllpassNotchFound(_)) if a.missing_notch == MissingNotch::MinPhase => {
                    model::reconstruct_with(h, true, a.mode, &cfg)?
                }
                other => other?,
            };
            let out = model::model_to_hrir_with(&m, n, cfg.tail_rel)?.with_coordinates(ds.coordinate_system);
            Ok((m, out))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new([
        "azimuth_deg",
        "elevation_deg",
        "ear",
        "flavor",
        "t_d",
        "apf_r",
        "apf_f0_hz",
        "apf_tau_peak",
        "extra_notches",
    ]);
    for (m, _) in &built {
        table.push(model_row(m));
    }
    let name = format!("{}-{}", ds.name, match a.mode {
        ReconstructionMode::MHrtf => "m-hrtf",
        ReconstructionMode::MinPd => "min-pd",
    });
    let out = Dataset::new(name, ds.coordinate_system, built.into_iter().map(|(_, h)| h).collect())?;
    io::save_dataset(&out, &a.out)?;
    if let Some(p) = &a.table {
        util::emit_table(Some(p), &table)?;
    }
    let apf_count = table.rows.iter().filter(|r| !r[5].is_empty()).count();
    let pure_count = table.rows.iter().filter(|r| r[3] == "pure_min_phase").count();
    util::summary(json!({
        "records": out.records.len(),
        "with_all_pass": apf_count,
        "pure_min_phase": pure_count,
    }))
}
