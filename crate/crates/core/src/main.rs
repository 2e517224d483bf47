use std::process::ExitCode;

fn main() -> ExitCode {
    bilocal::cli::main()
}
