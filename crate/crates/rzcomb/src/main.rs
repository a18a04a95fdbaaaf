fn main() {
    std::process::exit(rzcomb::cli::run());
}
