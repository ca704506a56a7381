use std::process::ExitCode;

fn main() -> ExitCode {
    gkdv_core::cli::run(std::env::args_os())
}
