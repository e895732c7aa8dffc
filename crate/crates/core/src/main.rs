fn main() -> std::process::ExitCode {
    sparsecode::cli::main()
}
