fn main() {
    std::process::exit(histotet::cli::run_from(std::env::args_os()));
}
