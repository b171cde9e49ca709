use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(shortint::cli::run(std::env::args_os()) as u8)
}
