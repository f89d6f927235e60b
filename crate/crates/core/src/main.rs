fn main() {
    std::process::exit(qscramble::cli::run(std::env::args_os()));
}
