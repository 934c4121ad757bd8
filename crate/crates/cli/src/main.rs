fn main() {
    std::process::exit(cellscale_cli::main_with_args(std::env::args_os()));
}
