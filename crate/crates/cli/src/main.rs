use std::io::{self, Write};
use std::process::ExitCode;

use skellam_markov_cli::{parse_command, run_command, CliError};

fn main() -> ExitCode {
    let cmd = match parse_command(std::env::args_os().skip(1)) {
        Ok(cmd) => cmd,
        Err(CliError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut err = io::stderr();
    let result = run_command(&cmd, &mut out, &mut err);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
