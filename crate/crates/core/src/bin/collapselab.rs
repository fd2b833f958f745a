fn main() {
    let code = collapselab::cli::run_command(std::env::args_os());
    std::process::exit(code);
}
