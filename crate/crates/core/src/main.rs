fn main() {
    std::process::exit(corner_bie::cli::run(std::env::args_os()));
}
