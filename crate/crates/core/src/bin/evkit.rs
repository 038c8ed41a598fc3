use std::process::ExitCode;

fn main() -> ExitCode {
    evkit::cli::main()
}
