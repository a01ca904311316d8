fn main() {
    std::process::exit(smoothdt::harness::cli::run(std::env::args_os()));
}
