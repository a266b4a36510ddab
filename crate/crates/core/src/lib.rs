//! Minimum-phase / all-pass HRTF decomposition, group-delay notch analysis,
//! Fourier-Bessel interpolation on circles, second-order all-pass
//! compensation and binaural rendering.

pub mod apf;
pub mod dsp;
pub mod eval;
pub mod fbs;
pub mod io;
pub mod model;
pub mod notch;
pub mod render;
pub mod synth;

/// Any error the library can produce.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Dsp(#[from] dsp::DspError),
    #[error(transparent)]
    Notch(#[from] notch::NotchError),
    #[error(transparent)]
    Fbs(#[from] fbs::FbsError),
    #[error(transparent)]
    Apf(#[from] apf::ApfError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error(transparent)]
    Render(#[from] render::RenderError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
