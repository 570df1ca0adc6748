use std::process::ExitCode;

fn main() -> ExitCode {
    finsler2d::cli::run()
}
