fn main() {
    std::process::exit(ergodisk::cli::run(std::env::args_os()));
}
