use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hrtf_core::dsp::{CoordinateSystem, Ear};
use hrtf_core::fbs::{FbsConfig, FitMethod};
use hrtf_core::io::wav::SampleFormat;
use hrtf_core::io::Plane;
use hrtf_core::model::{ReconstructionMode, SweepRadial};
use hrtf_core::notch::{NotchConfig, NotchSource};

#[derive(Parser, Debug)]
#[command(name = "hrtf-lab", version, about = "HRTF minimum-phase/all-pass analysis, interpolation and rendering")]
pub struct Cli {
    /// Worker threads for per-direction stages [default: all cores]
    #[arg(long, global = true, env = "HRTF_LAB_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Split HRIRs into minimum-phase and all-pass factors
    Decompose(DecomposeArgs),
    /// Extract spectral notches from the LP group delay
    Notches(NotchesArgs),
    /// Fit a Fourier-Bessel series to one circle of a dataset
    FbsFit(FbsFitArgs),
    /// Evaluate an interpolant on a grid of circle angles
    Interpolate(InterpolateArgs),
    /// Build the pure minimum-phase map of a circle
    Classify(ClassifyArgs),
    /// Design a second-order all-pass section
    DesignApf(DesignApfArgs),
    /// Rebuild HRIRs from their minimum-phase part, delay and all-pass section
    Reconstruct(ReconstructArgs),
    /// Normalized cross coherence between responses
    Ncc(NccArgs),
    /// Binaural rendering of a mono signal along a trajectory
    Render(RenderArgs),
    /// Generate synthetic datasets, noise and trajectories
    SynthDataset(SynthArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Dataset manifest (JSON)
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// A single HRIR stored as a WAV file (first channel)
    #[arg(long)]
    pub wav: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SelectArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Keep only records at this azimuth (degrees)
    #[arg(long, allow_negative_numbers = true)]
    pub azimuth: Option<f64>,
    /// Keep only records at this elevation (degrees)
    #[arg(long, allow_negative_numbers = true)]
    pub elevation: Option<f64>,
    /// Keep only records of this ear
    #[arg(long)]
    pub ear: Option<Ear>,
}

#[derive(Args, Debug, Clone)]
pub struct NotchArgs {
    /// Notch threshold on the group delay, samples (negative)
    #[arg(long, default_value_t = -0.8, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Linear-prediction order
    #[arg(long, default_value_t = 12)]
    pub lp_order: usize,
    /// Half-Hann taper length [default: HRIR length]
    #[arg(long)]
    pub window_len: Option<usize>,
    /// Minimum spacing between reported notches, Hz
    #[arg(long, default_value_t = 500.0)]
    pub min_separation_hz: f64,
}

impl NotchArgs {
    pub fn config(&self) -> NotchConfig {
        NotchConfig {
            threshold: self.threshold,
            lp_order: self.lp_order,
            window_len: self.window_len,
            min_separation_hz: self.min_separation_hz,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct FbsArgs {
    /// Highest angular order
    #[arg(long, default_value_t = 10)]
    pub m_max: usize,
    /// First radial index
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    /// Last radial index
    #[arg(long, default_value_t = 70)]
    pub k_max: usize,
    /// Radial normalization edge, Hz [default: fs/2]
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Coefficient estimator (least-squares, projection)
    #[arg(long, default_value = "least-squares")]
    pub method: FitMethod,
}

impl FbsArgs {
    pub fn config(&self) -> FbsConfig {
        FbsConfig {
            m_max: self.m_max,
            k_min: self.k_min,
            k_max: self.k_max,
            f_max: self.f_max,
            method: self.method,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CircleArgs {
    /// Dataset manifest (JSON)
    #[arg(long)]
    pub dataset: PathBuf,
    /// median, horizontal or interaural:<lateral deg>
    #[arg(long, default_value = "median")]
    pub plane: Plane,
    #[arg(long, default_value = "left")]
    pub ear: Ear,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub select: SelectArgs,
    #[command(flatten)]
    pub notch: NotchArgs,
    /// Output CSV: per-bin curves for one record, a summary row per record otherwise [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NotchesArgs {
    #[command(flatten)]
    pub select: SelectArgs,
    #[command(flatten)]
    pub notch: NotchArgs,
    /// Decomposition factor to analyse (composite, min-phase, all-pass)
    #[arg(long, default_value = "composite")]
    pub source: NotchSource,
    /// Output CSV [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FbsFitArgs {
    #[command(flatten)]
    pub circle: CircleArgs,
    #[command(flatten)]
    pub fbs: FbsArgs,
    /// Binary model file
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the coefficients as CSV
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "interp_source")]
pub struct InterpSource {
    /// Fitted model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Dataset to interpolate with a per-bin angular series
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InterpolateArgs {
    #[command(flatten)]
    pub source: InterpSource,
    #[arg(long, default_value = "median")]
    pub plane: Plane,
    #[arg(long, default_value = "left")]
    pub ear: Ear,
    /// Coordinates of the output directions [default: the dataset's, else interaural-polar]
    #[arg(long)]
    pub coordinates: Option<CoordinateSystem>,
    /// Highest angular order of the series (with --dataset)
    #[arg(long, default_value_t = 10)]
    pub m_max: usize,
    /// Output HRIR length (with --model)
    #[arg(long, default_value_t = 200)]
    pub length: usize,
    /// Angular step of the output grid, degrees
    #[arg(long, default_value_t = 1.0)]
    pub step_deg: f64,
    /// Output dataset manifest
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Dataset manifest (JSON)
    #[arg(long)]
    pub dataset: PathBuf,
    /// Circle to interpolate; without it every selected record is classified as is
    #[arg(long)]
    pub plane: Option<Plane>,
    #[arg(long, default_value = "left")]
    pub ear: Ear,
    /// Sweep step, degrees
    #[arg(long, default_value_t = 1.0)]
    pub step_deg: f64,
    /// Radial side of the interpolant (complete, bessel)
    #[arg(long, default_value = "complete")]
    pub radial: SweepRadial,
    #[command(flatten)]
    pub fbs: FbsArgs,
    #[command(flatten)]
    pub notch: NotchArgs,
    /// Binary map file
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write the map as CSV
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "apf_target")]
pub struct ApfTarget {
    /// Pole radius
    #[arg(long)]
    pub r: Option<f64>,
    /// Notch depth, samples; the target peak delay is baseline + |depth|
    #[arg(long, allow_negative_numbers = true)]
    pub depth: Option<f64>,
    /// Target peak group delay, samples
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct DesignApfArgs {
    /// Centre frequency, Hz
    #[arg(long)]
    pub f0: f64,
    /// Sampling rate, Hz
    #[arg(long, default_value_t = 44100.0)]
    pub fs: f64,
    #[command(flatten)]
    pub target: ApfTarget,
    /// Delay of the section at r = 0, samples
    #[arg(long, default_value_t = hrtf_core::apf::BASELINE_DELAY)]
    pub baseline: f64,
    #[arg(long, value_enum, default_value_t = TextFormat::Csv)]
    pub format: TextFormat,
    /// Output file [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the analytic group delay curve as CSV
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Points of the group delay curve, DC to Nyquist
    #[arg(long, default_value_t = 513)]
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MissingNotch {
    /// Fail with NoAllpassNotchFound
    Error,
    /// Treat the direction as pure minimum phase
    MinPhase,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Dataset manifest (JSON)
    #[arg(long)]
    pub dataset: PathBuf,
    /// Pure minimum-phase map; without it every record is classified as is
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Model (m-hrtf, min-pd)
    #[arg(long, default_value = "m-hrtf")]
    pub mode: ReconstructionMode,
    /// Keep only records of this ear
    #[arg(long)]
    pub ear: Option<Ear>,
    /// Output HRIR length [default: the dataset's]
    #[arg(long)]
    pub length: Option<usize>,
    /// Delay of the all-pass section at r = 0, samples
    #[arg(long, default_value_t = hrtf_core::apf::BASELINE_DELAY)]
    pub baseline: f64,
    /// What to do when a direction outside the pure set has no all-pass notch
    #[arg(long, value_enum, default_value_t = MissingNotch::Error)]
    pub missing_notch: MissingNotch,
    #[command(flatten)]
    pub notch: NotchArgs,
    /// Output dataset manifest
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write one row per model as CSV
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NccArgs {
    /// Ground-truth response (WAV, first channel)
    #[arg(long, requires = "test", conflicts_with = "gt_dataset")]
    pub gt: Option<PathBuf>,
    /// Response to compare (WAV, first channel)
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Ground-truth dataset; compares --apf and --mpd reconstructions per direction
    #[arg(long, requires_all = ["apf", "mpd"])]
    pub gt_dataset: Option<PathBuf>,
    /// Dataset reconstructed with the all-pass model
    #[arg(long)]
    pub apf: Option<PathBuf>,
    /// Dataset reconstructed with the minimum-phase-plus-delay model
    #[arg(long)]
    pub mpd: Option<PathBuf>,
    #[arg(long)]
    pub ear: Option<Ear>,
    /// Lag window half-width, samples [default: response length]
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Write the coherence curve (WAV mode) as CSV
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Output CSV [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ResolverKind {
    /// Nearest stored direction
    Bank,
    /// Per-bin angular series on one circle
    Series,
    /// Fitted Fourier-Bessel series on one circle
    Bessel,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Mono input WAV (multichannel input is downmixed)
    #[arg(long, short)]
    pub input: PathBuf,
    /// Dataset manifest with both ears
    #[arg(long)]
    pub dataset: PathBuf,
    /// Stereo output WAV
    #[arg(long, short)]
    pub out: PathBuf,
    /// Trajectory CSV (start_sample,azimuth_deg,elevation_deg)
    #[arg(long, conflicts_with = "sweep")]
    pub trajectory: Option<PathBuf>,
    /// Azimuth step of a full-turn sweep over the input, degrees
    #[arg(long)]
    pub sweep: Option<f64>,
    /// Fixed (or sweep start) azimuth
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub azimuth: f64,
    /// Fixed (or sweep) elevation
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,
    #[arg(long, value_enum, default_value_t = ResolverKind::Bank)]
    pub resolver: ResolverKind,
    /// Direction match tolerance for the bank resolver, degrees
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    /// Circle of the series resolvers
    #[arg(long, default_value = "horizontal")]
    pub plane: Plane,
    #[command(flatten)]
    pub fbs: FbsArgs,
    /// Crossfade at direction switches, samples (flag alone: 256)
    #[arg(long, num_args = 0..=1, default_value_t = 0, default_missing_value = "256")]
    pub xfade: usize,
    /// Convolution block size, samples
    #[arg(long, default_value_t = hrtf_core::render::DEFAULT_BLOCK_SIZE)]
    pub block_size: usize,
    /// Output sample format (float32, int16)
    #[arg(long, default_value = "float32")]
    pub sample_format: SampleFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Median-plane circle with an all-pass section over part of it
    InjectedApf,
    /// Horizontal circle with first-order angular variation
    Horizontal,
    /// Median-plane circle sampled from a random angularly band-limited series
    Bandlimited,
    /// Median-plane records with a zero pair moving in frequency
    NotchSweep,
    /// Random decaying HRIRs on the median plane
    Random,
    /// Pure minimum-phase, zero-pair notch and min-phase-plus-all-pass records
    Constructed,
    /// Gaussian white noise WAV
    Noise,
    /// Full-turn azimuth sweep trajectory CSV
    Trajectory,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Output path (manifest, WAV or CSV depending on the kind)
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// HRIR length
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(16..))]
    pub length: u32,
    #[arg(long, default_value_t = 44100.0)]
    pub fs: f64,
    /// Angular grid spacing, degrees (sweep step for trajectories)
    #[arg(long, default_value_t = 10.0)]
    pub step_deg: f64,
    /// Highest angular order (bandlimited)
    #[arg(long, default_value_t = 5)]
    pub m_max: usize,
    /// Duration, seconds (noise, trajectory)
    #[arg(long, default_value_t = 5.0)]
    pub seconds: f64,
    /// Noise standard deviation
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    /// Trajectory elevation, degrees
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,
}
