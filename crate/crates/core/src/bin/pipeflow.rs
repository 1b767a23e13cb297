fn main() {
    std::process::exit(pipeflow::cli::run_command(std::env::args_os()));
}
