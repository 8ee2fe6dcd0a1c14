fn main() {
    std::process::exit(histgap::cli::run(std::env::args_os()));
}
