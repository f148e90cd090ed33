fn main() {
    std::process::exit(gaussync::cli::run(std::env::args_os()));
}
