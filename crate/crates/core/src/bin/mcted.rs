fn main() {
    std::process::exit(mcted::cli::run(std::env::args_os()));
}
