fn main() {
    std::process::exit(qutrit_codec::cli::main());
}
