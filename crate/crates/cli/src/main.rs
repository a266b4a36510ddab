fn main() {
    std::process::exit(hrtf_lab::run(std::env::args_os()));
}
