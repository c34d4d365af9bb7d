fn main() {
    std::process::exit(crjet::cli::main_with_args(std::env::args_os()));
}
