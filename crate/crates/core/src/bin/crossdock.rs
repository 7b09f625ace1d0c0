fn main() {
    std::process::exit(crossdock::cli::run(std::env::args_os()));
}
