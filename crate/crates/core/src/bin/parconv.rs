fn main() {
    std::process::exit(parconv::cli::main_with_args(std::env::args_os()));
}
