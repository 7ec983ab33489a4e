use std::process::ExitCode;

fn main() -> ExitCode {
    serix::cli::main()
}
