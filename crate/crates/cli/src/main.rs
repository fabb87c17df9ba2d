fn main() {
    std::process::exit(scx_cli::run(std::env::args_os()));
}
