fn main() {
    std::process::exit(qso::cli::main());
}
