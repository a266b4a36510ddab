use hrtf_core::dsp::{CoordinateSystem, HrirRecord};
use hrtf_core::fbs::{self, FbsEvaluator};
use hrtf_core::io::{self, select_plane, Dataset};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{FbsFitArgs, InterpolateArgs};
use crate::util;
use crate::CliError;

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

pub fn fbs_fit(a: FbsFitArgs) -> Result<(), CliError> {
    let ds = io::load_dataset(&a.circle.dataset)?;
    util::warn_all(&ds.warnings);
    let circle = select_plane(&ds, a.circle.plane, a.circle.ear)?;
    let model = fbs::fbs_fit(&circle.records, &circle.thetas, &a.fbs.config())?;
    fbs::format::save_model(&model, &a.out)?;
    if let Some(p) = &a.coefficients {
        util::emit_table(Some(p), &fbs::format::coefficient_table(&model))?;
    }
    let eval = model.evaluator(ds.hrir_length)?;
    let worst = circle
        .records
        .par_iter()
        .zip(&circle.thetas)
        .map(|(r, &t)| relative_l2(&eval.hrir(t), r.samples()))
        .reduce(|| 0.0, f64::max);
    util::summary(json!({
        "records": circle.len(),
        "m_max": model.m_max,
        "k_min": model.k_min,
        "k_max": model.k_max,
        "f_max": model.f_max,
        "max_training_rel_error": worst,
    }))
}

pub fn interpolate(a: InterpolateArgs) -> Result<(), CliError> {
    if !(a.step_deg > 0.0 && a.step_deg <= 360.0) {
        return Err(CliError::Usage(format!("--step-deg must be in (0, 360], got {}", a.step_deg)));
    }
    let (eval, cs): (FbsEvaluator, CoordinateSystem) = match (&a.source.model, &a.source.dataset) {
        (Some(m), _) => (
            fbs::format::load_model(m)?.evaluator(a.length)?,
            a.coordinates.unwrap_or(CoordinateSystem::InterauralPolar),
        ),
        (None, Some(d)) => {
            let ds = io::load_dataset(d)?;
            util::warn_all(&ds.warnings);
            let circle = select_plane(&ds, a.plane, a.ear)?;
            (
                fbs::angular_series(&circle.records, &circle.thetas, a.m_max)?,
                a.coordinates.unwrap_or(ds.coordinate_system),
            )
        }
        (None, None) => unreachable!("clap enforces one source"),
    };
    let count = (360.0 / a.step_deg - 1e-9).ceil() as usize;
    let records = (0..count)
        .into_par_iter()
        .map(|i| {
            let theta = (i as f64 * a.step_deg).to_radians();
            Ok(eval.record(theta)?.with_direction(a.plane.direction_at(theta, cs)).with_ear(a.ear))
        })
        .collect::<Result<Vec<HrirRecord>, CliError>>()?;
    let ds = Dataset::new("interpolated", cs, records)?;
    io::save_dataset(&ds, &a.out)?;
    util::summary(json!({ "records": ds.records.len(), "hrir_length": ds.hrir_length }))
}
