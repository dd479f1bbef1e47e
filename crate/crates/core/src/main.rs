fn main() {
    std::process::exit(renoq::cli::main());
}
