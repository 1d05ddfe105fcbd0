fn main() {
    std::process::exit(confrad::cli::run());
}
