use hrtf_core::dsp::HrirRecord;
use hrtf_core::eval::{self, EvalError, EvalRow};
use hrtf_core::io::{self, fmt_f64, Dataset, Table};
use rayon::prelude::*;

use crate::args::NccArgs;
use crate::util;
use crate::CliError;

pub fn ncc(a: NccArgs) -> Result<(), CliError> {
    match (&a.gt, &a.test, &a.gt_dataset) {
        (Some(gt), Some(test), None) => {
            let (g, h) = (util::hrir_from_wav(gt)?, util::hrir_from_wav(test)?);
            let lag = a.max_lag.unwrap_or(g.len().max(h.len()));
            let r = eval::ncc(g.samples(), h.samples(), lag)?;
            if let Some(p) = &a.curve {
                let mut t = Table::new(["lag", "psi"]);
                for (i, v) in r.curve.iter().enumerate() {
                    t.push(vec![(i as i64 - r.max_lag as i64).to_string(), fmt_f64(*v)]);
                }
                util::emit_table(Some(p), &t)?;
            }
            let mut t = Table::new(["psi_star", "lag_at_peak"]);
            t.push(vec![fmt_f64(r.psi_star), r.lag_at_peak.to_string()]);
            util::emit_table(a.out.as_deref(), &t)
        }
        (None, None, Some(gt)) => evaluate(&a, gt),
        _ => Err(CliError::Usage("give --gt with --test, or --gt-dataset with --apf and --mpd".into())),
    }
}

fn counterpart<'a>(ds: &'a Dataset, h: &HrirRecord, which: &str) -> Result<&'a HrirRecord, CliError> {
    ds.find(h.direction, h.ear).ok_or_else(|| {
        CliError::NoMatchingRecords(format!(
            "{which} dataset has no {} record at azimuth {}, elevation {}",
            h.ear.as_str(),
            h.direction.azimuth_deg,
            h.direction.elevation_deg
        ))
    })
}

fn evaluate(a: &NccArgs, gt: &std::path::Path) -> Result<(), CliError> {
    let gt = io::load_dataset(gt)?;
    let apf = io::load_dataset(a.apf.as_ref().expect("clap requires --apf"))?;
    let mpd = io::load_dataset(a.mpd.as_ref().expect("clap requires --mpd"))?;
    let lag = a.max_lag.unwrap_or(gt.hrir_length);
    let records: Vec<&HrirRecord> = gt.records.iter().filter(|r| a.ear.is_none_or(|e| r.ear == e)).collect();
    let mut rows = records
        .par_iter()
        .map(|h| {
            let pa = eval::ncc(h.samples(), counterpart(&apf, h, "apf")?.samples(), lag)?.psi_star;
            let pm = eval::ncc(h.samples(), counterpart(&mpd, h, "mpd")?.samples(), lag)?.psi_star;
            Ok(EvalRow {
                direction: h.direction,
                psi_apf: pa,
                psi_mpd: pm,
                label: None,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let diffs: Vec<f64> = rows.iter().map(EvalRow::psi_d).collect();
    match eval::kmeans3_1d(&diffs) {
        Ok(k) => {
            for (row, l) in rows.iter_mut().zip(k.labels) {
                row.label = Some(l);
            }
        }
        // Too few distinct differences to cluster; rows stay unlabelled.
        Err(e @ EvalError::DegenerateInput { .. }) => eprintln!("hrtf-lab: warning: {e}"),
        Err(e) => return Err(e.into()),
    }
    util::emit_table(a.out.as_deref(), &eval::eval_table(&rows))
}
