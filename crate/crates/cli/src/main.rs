use std::process::ExitCode;

fn main() -> ExitCode {
    doubleblind_cli::run()
}
