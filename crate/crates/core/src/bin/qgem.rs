fn main() {
    std::process::exit(qgem::cli::main());
}
