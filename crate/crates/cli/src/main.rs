fn main() {
    std::process::exit(sphreg_cli::run(std::env::args_os()));
}
