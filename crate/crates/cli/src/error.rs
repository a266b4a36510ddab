use hrtf_core::{apf, dsp, eval, fbs, io, model, notch, render, synth};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("UsageError: {0}")]
    Usage(String),
    #[error("NoMatchingRecords: {0}")]
    NoMatchingRecords(String),
    #[error(transparent)]
    Core(#[from] hrtf_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        })*
    };
}

from_core!(
    dsp::DspError,
    notch::NotchError,
    fbs::FbsError,
    apf::ApfError,
    model::ModelError,
    eval::EvalError,
    render::RenderError,
    io::IoError,
    synth::SynthError
);
