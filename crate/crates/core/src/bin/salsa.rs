fn main() {
    std::process::exit(salsa_seld::cli::main_with_args(std::env::args_os()));
}
