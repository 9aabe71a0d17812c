fn main() {
    std::process::exit(patricia_fringe::cli::main_from_env());
}
