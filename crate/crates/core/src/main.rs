fn main() {
    std::process::exit(rdh::cli::run(std::env::args_os()));
}
