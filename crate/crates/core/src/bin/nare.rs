fn main() {
    std::process::exit(nare::cli::main_with(std::env::args_os()));
}
