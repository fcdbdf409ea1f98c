fn main() {
    std::process::exit(frictionlab::cli::main_with_args(std::env::args_os()));
}
