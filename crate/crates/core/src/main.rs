fn main() {
    std::process::exit(advanced_harmonic::cli::main_with_args(std::env::args_os()));
}
