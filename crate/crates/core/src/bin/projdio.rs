fn main() {
    std::process::exit(projdio::cli::main_with_args(std::env::args_os()));
}
