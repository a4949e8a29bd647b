fn main() -> std::process::ExitCode {
    wsc::cli::main()
}
