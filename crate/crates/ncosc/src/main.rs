fn main() {
    std::process::exit(ncosc::cli::run(std::env::args_os()));
}
