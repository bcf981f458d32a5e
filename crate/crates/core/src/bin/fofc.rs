fn main() {
    std::process::exit(mixed_fofc::cli::run(std::env::args_os()));
}
