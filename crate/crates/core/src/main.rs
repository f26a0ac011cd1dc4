fn main() {
    std::process::exit(veritext::cli::main());
}
