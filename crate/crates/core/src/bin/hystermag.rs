fn main() {
    std::process::exit(hystermag::cli::run(std::env::args_os()));
}
