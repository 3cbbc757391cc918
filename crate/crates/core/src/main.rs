fn main() {
    std::process::exit(interpoint::cli::run());
}
