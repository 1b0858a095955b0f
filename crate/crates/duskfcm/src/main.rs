fn main() {
    std::process::exit(duskfcm::cli::main_with_args(std::env::args_os()));
}
