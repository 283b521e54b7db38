fn main() {
    std::process::exit(aac_calculus::cli::run(std::env::args_os()));
}
