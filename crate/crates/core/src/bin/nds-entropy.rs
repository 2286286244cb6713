fn main() {
    std::process::exit(nds_entropy::cli::main_with_args(std::env::args_os()));
}
