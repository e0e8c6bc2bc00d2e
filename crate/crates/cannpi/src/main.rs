fn main() {
    std::process::exit(cannpi::cli::main_with(std::env::args_os()));
}
