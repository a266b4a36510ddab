use hrtf_core::dsp::{Direction, Ear};
use hrtf_core::fbs;
use hrtf_core::io::{self, select_plane, wav, Table};
use hrtf_core::render::{
    self as core_render, DirectionResolverSync, FbsResolver, FilterBank, RenderConfig, Trajectory,
};
use serde_json::json;

use crate::args::{RenderArgs, ResolverKind};
use crate::util;
use crate::CliError;

pub fn render(a: RenderArgs) -> Result<(), CliError> {
    let input = wav::read_wav(&a.input)?;
    let x = input.downmix();
    let ds = io::load_dataset(&a.dataset)?;
    util::warn_all(&ds.warnings);
    let resolver: Box<dyn DirectionResolverSync> = match a.resolver {
        ResolverKind::Bank => Box::new(FilterBank::from_dataset(&ds).with_tolerance(a.tolerance)),
        ResolverKind::Series | ResolverKind::Bessel => {
            let (l, r) = (select_plane(&ds, a.plane, Ear::Left)?, select_plane(&ds, a.plane, Ear::Right)?);
            let (el, er) = if a.resolver == ResolverKind::Series {
                (
                    fbs::angular_series(&l.records, &l.thetas, a.fbs.m_max)?,
                    fbs::angular_series(&r.records, &r.thetas, a.fbs.m_max)?,
                )
            } else {
                let cfg = a.fbs.config();
                (
                    fbs::fbs_fit(&l.records, &l.thetas, &cfg)?.evaluator(ds.hrir_length)?,
                    fbs::fbs_fit(&r.records, &r.thetas, &cfg)?.evaluator(ds.hrir_length)?,
                )
            };
            Box::new(FbsResolver::from_evaluators(a.plane, ds.coordinate_system, el, er))
        }
    };
    let start = Direction::new(a.azimuth, a.elevation);
    let traj = match (&a.trajectory, a.sweep) {
        (Some(p), _) => Trajectory::from_table(&Table::read_path(p)?)?,
        (None, Some(step)) => {
            if !(step > 0.0) {
                return Err(CliError::Usage(format!("--sweep must be positive, got {step}")));
            }
            let steps = ((360.0 / step).round() as usize).clamp(1, x.len().max(1));
            Trajectory::azimuth_sweep(x.len().max(1), start, step, steps)?
        }
        (None, None) => Trajectory::fixed(start),
    };
    let cfg = RenderConfig {
        block_size: a.block_size,
        xfade: a.xfade,
    };
    let y = core_render::render(&x, input.fs as f64, &traj, resolver.as_ref(), &cfg)?;
    let frames = y.left.len();
    let peak = y.left.iter().chain(&y.right).fold(0.0f64, |m, v| m.max(v.abs()));
    let out = wav::Audio {
        fs: input.fs,
        channels: vec![y.left, y.right],
    };
    wav::write_wav(&a.out, &out, a.sample_format)?;
    util::summary(json!({
        "frames": frames,
        "segments": traj.points().len(),
        "peak": peak,
    }))
}
