fn main() {
    std::process::exit(epsent_core::cli::run(std::env::args_os()));
}
