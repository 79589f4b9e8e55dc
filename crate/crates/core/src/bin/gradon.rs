fn main() {
    std::process::exit(gradon::cli::main_with_args(std::env::args_os()));
}
