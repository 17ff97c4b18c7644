fn main() {
    std::process::exit(countstream::cli::main_with_args(std::env::args_os()));
}
