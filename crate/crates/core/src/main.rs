fn main() {
    std::process::exit(ftspanner::cli::run());
}
