fn main() -> std::process::ExitCode {
    topc::cli::main()
}
