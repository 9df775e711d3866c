fn main() {
    std::process::exit(fdpu_cli::run_from_args(std::env::args_os()));
}
