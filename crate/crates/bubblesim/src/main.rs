fn main() {
    std::process::exit(bubblesim::cli::run(std::env::args_os()));
}
