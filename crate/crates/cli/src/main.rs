use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(agiven_cli::entry(std::env::args_os()))
}
