fn main() {
    std::process::exit(oprenewal::cli::main_with_args(std::env::args_os()));
}
