use std::process::ExitCode;

fn main() -> ExitCode {
    polyembed::cli::main()
}
