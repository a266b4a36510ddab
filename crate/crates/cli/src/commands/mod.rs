mod analysis;
mod interp;
mod modelling;
mod ncc;
mod render;
mod synth;

use crate::args::Command;
use crate::CliError;

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Decompose(a) => analysis::decompose(a),
        Command::Notches(a) => analysis::notches(a),
        Command::Classify(a) => analysis::classify(a),
        Command::FbsFit(a) => interp::fbs_fit(a),
        Command::Interpolate(a) => interp::interpolate(a),
        Command::DesignApf(a) => modelling::design_apf(a),
        Command::Reconstruct(a) => modelling::reconstruct(a),
        Command::Ncc(a) => ncc::ncc(a),
        Command::Render(a) => render::render(a),
        Command::SynthDataset(a) => synth::synth(a),
    }
}
