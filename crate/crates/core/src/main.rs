fn main() {
    std::process::exit(mudpod::cli::run(std::env::args_os()));
}
