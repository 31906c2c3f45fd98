fn main() {
    std::process::exit(dharper_cli::run(std::env::args_os()));
}
