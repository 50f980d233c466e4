use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(unitary_forge::cli::run(std::env::args_os()))
}
