fn main() {
    std::process::exit(dpp_core::cli::run(std::env::args_os()));
}
