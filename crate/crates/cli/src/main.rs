fn main() {
    std::process::exit(morphoporo_cli::run(std::env::args().collect()));
}
