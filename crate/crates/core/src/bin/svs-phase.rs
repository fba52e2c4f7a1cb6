fn main() {
    std::process::exit(svs_phase::cli::run(std::env::args_os()));
}
