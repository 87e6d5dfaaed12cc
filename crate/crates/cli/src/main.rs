fn main() {
    std::process::exit(funtf_cli::run(std::env::args_os()));
}
