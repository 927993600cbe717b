fn main() {
    std::process::exit(erw::cli::run(std::env::args_os()));
}
