//! Offline binaural rendering along a trajectory.
//!
//! Each trajectory segment's input is convolved with that direction's
//! left/right HRIRs by FFT overlap-save, and the filter tails run on past
//! the segment end. The output is the sum of all segment contributions, so a
//! static trajectory gives exactly the full linear convolution. With a
//! crossfade the segment inputs are weighted by complementary linear ramps
//! around each switch.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::dsp::{fft, CoordinateSystem, Direction, Ear};
use crate::fbs::{FbsEvaluator, FbsModel};
use crate::io::{fmt_f64, Dataset, IoError, Plane, Table};

pub const DEFAULT_BLOCK_SIZE: usize = 4096;
pub const DEFAULT_XFADE: usize = 256;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("SampleRateMismatch: audio at {audio} Hz, filters at {filters} Hz")]
    SampleRateMismatch { audio: f64, filters: f64 },
    #[error("UnresolvableDirection: no filters for azimuth {az}, elevation {el}", az = .0.azimuth_deg, el = .0.elevation_deg)]
    UnresolvableDirection(Direction),
    #[error("InvalidTrajectory: {0}")]
    InvalidTrajectory(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub start_sample: usize,
    pub direction: Direction,
}

/// Direction changes at the listed sample indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self, RenderError> {
        let first = points
            .first()
            .ok_or_else(|| RenderError::InvalidTrajectory("trajectory is empty".into()))?;
        if first.start_sample != 0 {
            return Err(RenderError::InvalidTrajectory(format!(
                "first point starts at sample {}, expected 0",
                first.start_sample
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].start_sample <= w[0].start_sample) {
            return Err(RenderError::InvalidTrajectory(format!(
                "start samples must increase strictly ({} then {})",
                w[0].start_sample, w[1].start_sample
            )));
        }
        Ok(Self { points })
    }

    pub fn fixed(direction: Direction) -> Self {
        Self {
            points: vec![TrajectoryPoint {
                start_sample: 0,
                direction,
            }],
        }
    }

    /// Azimuth steps of `step_deg` spread evenly over `len` samples,
    /// starting at `start`, at constant elevation.
    pub fn azimuth_sweep(len: usize, start: Direction, step_deg: f64, steps: usize) -> Result<Self, RenderError> {
        if steps == 0 || steps > len {
            return Err(RenderError::InvalidTrajectory(format!(
                "cannot place {steps} steps in {len} samples"
            )));
        }
        let points = (0..steps)
            .map(|i| TrajectoryPoint {
                start_sample: i * len / steps,
                direction: Direction::new(
                    start.azimuth_deg + i as f64 * step_deg,
                    start.elevation_deg,
                ),
            })
            .collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    /// `start_sample,azimuth_deg,elevation_deg`
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["start_sample", "azimuth_deg", "elevation_deg"]);
        for p in &self.points {
            t.push(vec![
                p.start_sample.to_string(),
                fmt_f64(p.direction.azimuth_deg),
                fmt_f64(p.direction.elevation_deg),
            ]);
        }
        t
    }

    pub fn from_table(t: &Table) -> Result<Self, RenderError> {
        let col = |name: &str| {
            t.column(name)
                .ok_or_else(|| RenderError::InvalidTrajectory(format!("missing column '{name}'")))
        };
        let (cs, ca, ce) = (col("start_sample")?, col("azimuth_deg")?, col("elevation_deg")?);
        let bad = |what: &str, v: &str| RenderError::InvalidTrajectory(format!("bad {what} '{v}'"));
        let points = t
            .rows
            .iter()
            .map(|r| {
                Ok(TrajectoryPoint {
                    start_sample: r[cs].trim().parse().map_err(|_| bad("start_sample", &r[cs]))?,
                    direction: Direction::new(
                        r[ca].trim().parse().map_err(|_| bad("azimuth", &r[ca]))?,
                        r[ce].trim().parse().map_err(|_| bad("elevation", &r[ce]))?,
                    ),
                })
            })
            .collect::<Result<Vec<_>, RenderError>>()?;
        Self::new(points)
    }
}

/// Left/right filters for a direction.
pub trait DirectionResolver {
    fn fs(&self) -> f64;
    fn resolve(&self, d: Direction) -> Option<(Vec<f64>, Vec<f64>)>;
}

/// Explicit per-direction filter pairs, matched exactly or by nearest
/// neighbour within a tolerance.
#[derive(Clone, Debug, Default)]
pub struct FilterBank {
    fs: f64,
    tolerance_deg: f64,
    entries: Vec<(Direction, Vec<f64>, Vec<f64>)>,
}

impl FilterBank {
    pub fn new(fs: f64) -> Self {
        Self {
            fs,
            tolerance_deg: 0.0,
            entries: Vec::new(),
        }
    }

    pub fn with_tolerance(mut self, deg: f64) -> Self {
        self.tolerance_deg = deg;
        self
    }

    pub fn insert(&mut self, d: Direction, left: Vec<f64>, right: Vec<f64>) {
        self.entries.retain(|(e, _, _)| *e != d);
        self.entries.push((d, left, right));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Pairs every left record with the right record at the same direction.
    pub fn from_dataset(ds: &Dataset) -> Self {
        let mut bank = Self::new(ds.fs);
        for l in ds.records.iter().filter(|r| r.ear == Ear::Left) {
            if let Some(r) = ds.find(l.direction, Ear::Right) {
                bank.insert(l.direction, l.samples().to_vec(), r.samples().to_vec());
            }
        }
        bank
    }
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

impl DirectionResolver for FilterBank {
    fn fs(&self) -> f64 {
        self.fs
    }

    fn resolve(&self, d: Direction) -> Option<(Vec<f64>, Vec<f64>)> {
        self.entries
            .iter()
            .map(|(e, l, r)| {
                let dist = angle_diff(e.azimuth_deg, d.azimuth_deg).max(angle_diff(e.elevation_deg, d.elevation_deg));
                (dist, l, r)
            })
            .filter(|(dist, _, _)| *dist <= self.tolerance_deg)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, l, r)| (l.clone(), r.clone()))
    }
}

/// Interpolates with one FBS model per ear on a circle.
pub struct FbsResolver {
    plane: Plane,
    cs: CoordinateSystem,
    left: FbsEvaluator,
    right: FbsEvaluator,
}

impl FbsResolver {
    pub fn new(
        plane: Plane,
        cs: CoordinateSystem,
        left: &FbsModel,
        right: &FbsModel,
        n: usize,
    ) -> Result<Self, crate::fbs::FbsError> {
        Ok(Self {
            plane,
            cs,
            left: left.evaluator(n)?,
            right: right.evaluator(n)?,
        })
    }

    pub fn from_evaluators(plane: Plane, cs: CoordinateSystem, left: FbsEvaluator, right: FbsEvaluator) -> Self {
        Self { plane, cs, left, right }
    }
}

impl DirectionResolver for FbsResolver {
    fn fs(&self) -> f64 {
        self.left.fs()
    }

    fn resolve(&self, d: Direction) -> Option<(Vec<f64>, Vec<f64>)> {
        let theta = self.plane.angle_of(d, self.cs)?;
        Some((self.left.hrir(theta), self.right.hrir(theta)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderConfig {
    pub block_size: usize,
    /// Crossfade length at direction switches; 0 switches hard.
    pub xfade: usize,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            block_size: DEFAULT_BLOCK_SIZE,
            xfade: 0,
        }
    }
}

/// Overlap-save convolution with one FIR filter by fixed-size blocks.
pub struct OverlapSave {
    block: usize,
    nfft: usize,
    taps: usize,
    filter: Vec<Complex64>,
    history: Vec<f64>,
}

impl OverlapSave {
    pub fn new(h: &[f64], block: usize) -> Self {
        let taps = h.len().max(1);
        let nfft = (block + taps - 1).next_power_of_two();
        let mut padded = vec![Complex64::new(0.0, 0.0); nfft];
        for (p, &v) in padded.iter_mut().zip(h) {
            p.re = v;
        }
        fft::forward_in_place(&mut padded);
        Self {
            block,
            nfft,
            taps,
            filter: padded,
            history: vec![0.0; taps - 1],
        }
    }

    /// Filters up to `block` new samples, returning as many outputs.
    pub fn process(&mut self, x: &[f64]) -> Vec<f64> {
        assert!(x.len() <= self.block, "chunk longer than the block size");
        let keep = self.taps - 1;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nfft];
        for (b, &v) in buf.iter_mut().zip(self.history.iter().chain(x)) {
            b.re = v;
        }
        fft::forward_in_place(&mut buf);
        for (b, f) in buf.iter_mut().zip(&self.filter) {
            *b *= f;
        }
        fft::inverse_in_place(&mut buf);
        let out = buf[keep..keep + x.len()].iter().map(|c| c.re).collect();
        let mut joined: Vec<f64> = self.history.iter().copied().chain(x.iter().copied()).collect();
        self.history = joined.split_off(joined.len() - keep);
        out
    }
}

/// Adds `x (*) h` into `y` starting at `offset`, block by block.
fn accumulate(y: &mut [f64], offset: usize, x: &[f64], h: &[f64], block: usize) {
    let mut os = OverlapSave::new(h, block);
    let total = x.len() + h.len().saturating_sub(1);
    let mut pos = 0;
    while pos < total {
        let end = (pos + block).min(total);
        let chunk: Vec<f64> = (pos..end).map(|i| x.get(i).copied().unwrap_or(0.0)).collect();
        for (i, v) in os.process(&chunk).into_iter().enumerate() {
            y[offset + pos + i] += v;
        }
        pos = end;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stereo {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Renders mono `x` along `traj`. Output length is `len(x) + L_max - 1`.
pub fn render(
    x: &[f64],
    fs: f64,
    traj: &Trajectory,
    resolver: &dyn DirectionResolverSync,
    cfg: &RenderConfig,
) -> Result<Stereo, RenderError> {
    if cfg.block_size == 0 {
        return Err(RenderError::InvalidConfig("block size must be positive".into()));
    }
    if resolver.fs() != fs {
        return Err(RenderError::SampleRateMismatch {
            audio: fs,
            filters: resolver.fs(),
        });
    }
    // Segments that start within the signal.
    let pts: Vec<&TrajectoryPoint> = traj.points().iter().filter(|p| p.start_sample < x.len().max(1)).collect();
    let bounds: Vec<(usize, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (p.start_sample, pts.get(i + 1).map_or(x.len(), |q| q.start_sample)))
        .collect();
    let shortest = bounds.iter().map(|(a, b)| b - a).min().unwrap_or(0);
    let xfade = if bounds.len() > 1 { cfg.xfade.min(shortest) } else { 0 };

    let mut cache: HashMap<(u64, u64), (Vec<f64>, Vec<f64>)> = HashMap::new();
    let mut filters = Vec::with_capacity(pts.len());
    for p in &pts {
        let key = (p.direction.azimuth_deg.to_bits(), p.direction.elevation_deg.to_bits());
        let pair = match cache.get(&key) {
            Some(v) => v.clone(),
            None => {
                let v = resolver
                    .resolve(p.direction)
                    .ok_or(RenderError::UnresolvableDirection(p.direction))?;
                cache.insert(key, v.clone());
                v
            }
        };
        filters.push(pair);
    }
    let max_len = filters
        .iter()
        .map(|(l, r)| l.len().max(r.len()))
        .max()
        .unwrap_or(1)
        .max(1);
    let out_len = x.len() + max_len - 1;

    // Segment inputs with complementary ramps of `xfade` samples centred on
    // each switch.
    let half = xfade / 2;
    let segments: Vec<(usize, Vec<f64>)> = bounds
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let lo = if i == 0 { a } else { a - half };
            let hi = if i + 1 == bounds.len() { b } else { (b - half + xfade).min(x.len()) };
            let seg = (lo..hi)
                .map(|n| {
                    let mut w = 1.0;
                    if xfade > 0 && i > 0 && n < a - half + xfade {
                        w *= (n - (a - half)) as f64 / xfade as f64 + 0.5 / xfade as f64;
                    }
                    if xfade > 0 && i + 1 < bounds.len() && n >= b - half {
                        w *= 1.0 - ((n - (b - half)) as f64 + 0.5) / xfade as f64;
                    }
                    x[n] * w
                })
                .collect();
            (lo, seg)
        })
        .collect();

    let run = |pick: fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| {
        let mut y = vec![0.0; out_len];
        for ((lo, seg), f) in segments.iter().zip(&filters) {
            accumulate(&mut y, *lo, seg, pick(f), cfg.block_size);
        }
        y
    };
    let (left, right) = rayon::join(|| run(|f| &f.0), || run(|f| &f.1));
    Ok(Stereo { left, right })
}

/// Resolvers shared with the per-ear worker threads.
pub trait DirectionResolverSync: DirectionResolver + Sync {}
impl<T: DirectionResolver + Sync> DirectionResolverSync for T {}

#[cfg(test)]
mod tests {
    use super::*;

    fn bank(l: Vec<f64>, r: Vec<f64>) -> FilterBank {
        let mut b = FilterBank::new(48000.0);
        b.insert(Direction::default(), l, r);
        b
    }

    #[test]
    fn impulse_filters_pass_through() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = bank(vec![1.0], vec![1.0]);
        let y = render(&x, 48000.0, &Trajectory::fixed(Direction::default()), &b, &RenderConfig { block_size: 128, xfade: 0 }).unwrap();
        assert_eq!(y.left.len(), 1000);
        for (a, b) in y.left.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn delayed_left() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let b = bank(vec![0.0, 0.0, 0.0, 1.0], vec![1.0]);
        let y = render(&x, 48000.0, &Trajectory::fixed(Direction::default()), &b, &RenderConfig { block_size: 64, xfade: 0 }).unwrap();
        assert_eq!(y.left.len(), 303);
        for n in 0..300 {
            assert!((y.left[n + 3] - y.right[n]).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_direct_convolution() {
        let x: Vec<f64> = (0..5000).map(|i| ((i as f64) * 0.37).sin() * ((i % 17) as f64 - 8.0)).collect();
        let h: Vec<f64> = (0..200).map(|i| (-(i as f64) / 30.0).exp() * ((i as f64) * 0.9).cos()).collect();
        let b = bank(h.clone(), h.clone());
        let y = render(&x, 48000.0, &Trajectory::fixed(Direction::default()), &b, &RenderConfig { block_size: 512, xfade: 0 }).unwrap();
        let d = fft::convolve(&x, &h);
        assert_eq!(y.left.len(), d.len());
        let err = y.left.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn crossfade_is_transparent_for_equal_filters() {
        let x: Vec<f64> = (0..2000).map(|i| ((i as f64) * 0.05).cos()).collect();
        let h = vec![0.5, 0.25, -0.1];
        let mut b = FilterBank::new(48000.0);
        b.insert(Direction::new(0.0, 0.0), h.clone(), h.clone());
        b.insert(Direction::new(10.0, 0.0), h.clone(), h.clone());
        let traj = Trajectory::new(vec![
            TrajectoryPoint { start_sample: 0, direction: Direction::new(0.0, 0.0) },
            TrajectoryPoint { start_sample: 700, direction: Direction::new(10.0, 0.0) },
            TrajectoryPoint { start_sample: 1500, direction: Direction::new(0.0, 0.0) },
        ])
        .unwrap();
        let y = render(&x, 48000.0, &traj, &b, &RenderConfig { block_size: 256, xfade: 256 }).unwrap();
        let d = fft::convolve(&x, &h);
        let err = y.left.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn errors() {
        let b = bank(vec![1.0], vec![1.0]);
        assert!(matches!(
            render(&[1.0], 44100.0, &Trajectory::fixed(Direction::default()), &b, &RenderConfig::default()),
            Err(RenderError::SampleRateMismatch { .. })
        ));
        assert!(matches!(
            render(&[1.0], 48000.0, &Trajectory::fixed(Direction::new(5.0, 0.0)), &b, &RenderConfig::default()),
            Err(RenderError::UnresolvableDirection(_))
        ));
        assert!(Trajectory::new(vec![TrajectoryPoint { start_sample: 3, direction: Direction::default() }]).is_err());
    }
}
