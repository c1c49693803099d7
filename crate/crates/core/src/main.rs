fn main() -> std::process::ExitCode {
    wavestab::cli::main()
}
