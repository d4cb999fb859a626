fn main() {
    std::process::exit(listflow::cli::main());
}
