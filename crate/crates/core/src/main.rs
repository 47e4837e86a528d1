fn main() {
    std::process::exit(dicke_phase::cli::run_cli(std::env::args_os()));
}
