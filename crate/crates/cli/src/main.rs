fn main() {
    std::process::exit(lindblad_cli::run(std::env::args_os()));
}
