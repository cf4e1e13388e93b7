fn main() {
    std::process::exit(netctl::cli::run(std::env::args_os()));
}
