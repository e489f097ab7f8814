use std::process::ExitCode;

fn main() -> ExitCode {
    beamsync_cli::run(std::env::args_os())
}
