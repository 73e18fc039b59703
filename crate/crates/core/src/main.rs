fn main() {
    std::process::exit(rankin_lab::cli::run(std::env::args_os()));
}
