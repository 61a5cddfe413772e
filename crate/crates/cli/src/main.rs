use std::process::ExitCode;

fn main() -> ExitCode {
    match yule_cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("yule: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
