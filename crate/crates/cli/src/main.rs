fn main() {
    std::process::exit(reeblab_cli::run(std::env::args_os()));
}
