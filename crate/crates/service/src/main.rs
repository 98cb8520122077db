use std::process::ExitCode;

fn main() -> ExitCode {
    decompose_service::cli::run(std::env::args_os())
}
