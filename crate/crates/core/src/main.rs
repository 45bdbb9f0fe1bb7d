fn main() {
    std::process::exit(singular_phi::cli::main_from_args(std::env::args_os()));
}
