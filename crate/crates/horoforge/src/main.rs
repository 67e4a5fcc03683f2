fn main() {
    std::process::exit(horoforge::cli::run());
}
