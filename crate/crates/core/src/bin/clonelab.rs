fn main() {
    std::process::exit(clonelab::cli::main_with_args(std::env::args_os()));
}
