fn main() {
    std::process::exit(pharmonic_cli::run(std::env::args_os()));
}
