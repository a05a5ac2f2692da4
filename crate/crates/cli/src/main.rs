fn main() {
    std::process::exit(wfh_cli::main_entry());
}
