fn main() {
    std::process::exit(expray::cli::run(std::env::args_os()));
}
