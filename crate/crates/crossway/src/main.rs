fn main() {
    std::process::exit(crossway::cli::run_cli());
}
