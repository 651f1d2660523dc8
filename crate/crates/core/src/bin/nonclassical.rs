fn main() {
    std::process::exit(nonclassical::cli::run(std::env::args_os()));
}
