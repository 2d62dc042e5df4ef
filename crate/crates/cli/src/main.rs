fn main() {
    std::process::exit(apl_cli::run(std::env::args_os()));
}
