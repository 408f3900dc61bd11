fn main() {
    std::process::exit(riskcert::cli::run(std::env::args_os()));
}
