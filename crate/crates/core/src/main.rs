fn main() {
    std::process::exit(lexrules::cli::run(std::env::args_os()));
}
