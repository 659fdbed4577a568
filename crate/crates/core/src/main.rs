fn main() {
    std::process::exit(ksbox::cli::run(std::env::args_os()));
}
