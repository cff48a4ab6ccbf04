use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(fermiflow::run(std::env::args_os()))
}
