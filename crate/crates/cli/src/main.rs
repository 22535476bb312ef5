fn main() {
    std::process::exit(eqa_cli::run_command(std::env::args_os()));
}
