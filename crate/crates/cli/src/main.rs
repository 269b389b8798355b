fn main() {
    std::process::exit(pcmap_cli::run(std::env::args_os()));
}
