fn main() {
    env_logger::init();
    std::process::exit(fmdx::cli::run(std::env::args_os()));
}
