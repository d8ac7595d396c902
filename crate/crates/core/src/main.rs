fn main() {
    std::process::exit(qdisturb::cli::run(std::env::args_os()));
}
