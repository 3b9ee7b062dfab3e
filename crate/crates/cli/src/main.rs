fn main() {
    std::process::exit(gprc_cli::run(std::env::args_os()));
}
