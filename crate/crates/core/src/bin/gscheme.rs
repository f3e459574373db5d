fn main() {
    std::process::exit(gscheme::cli::main_with(std::env::args_os()));
}
