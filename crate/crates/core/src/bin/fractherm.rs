fn main() {
    std::process::exit(fractherm::cli::run_cli());
}
