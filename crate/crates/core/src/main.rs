fn main() {
    std::process::exit(sepwitness::cli::run(std::env::args_os()));
}
