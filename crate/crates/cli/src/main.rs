fn main() {
    std::process::exit(coupling_cli::run(std::env::args_os()));
}
