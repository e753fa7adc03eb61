fn main() {
    std::process::exit(seqlab_cli::main_entry());
}
