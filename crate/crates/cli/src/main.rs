fn main() {
    std::process::exit(tailkit_cli::cli::main_with_args(std::env::args_os()));
}
