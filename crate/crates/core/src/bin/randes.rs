fn main() {
    std::process::exit(randes::cli::main_with_args(std::env::args_os()));
}
