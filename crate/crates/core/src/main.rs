fn main() {
    std::process::exit(unitkit::cli::run(std::env::args_os()));
}
