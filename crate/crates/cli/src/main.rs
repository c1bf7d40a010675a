fn main() {
    std::process::exit(rfsqueeze_cli::main_with_args(std::env::args_os()));
}
