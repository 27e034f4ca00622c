fn main() {
    std::process::exit(evograph_cli::run(std::env::args_os()));
}
