fn main() {
    std::process::exit(offload_bargain::cli::main());
}
