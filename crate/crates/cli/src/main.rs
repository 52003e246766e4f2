fn main() -> std::process::ExitCode {
    cycletree_cli::main_entry()
}
