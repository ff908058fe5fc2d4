fn main() {
    std::process::exit(bosim::cli::run_cli(std::env::args_os()));
}
