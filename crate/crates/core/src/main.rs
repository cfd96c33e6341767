fn main() {
    std::process::exit(fitkit::cli::main());
}
