fn main() {
    std::process::exit(vnfplace::cli::main_with_args(std::env::args_os()));
}
