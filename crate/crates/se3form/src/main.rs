fn main() {
    std::process::exit(se3form::cli::run(std::env::args_os()));
}
