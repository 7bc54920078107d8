use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = tribell::app::Cli::parse();
    match tribell::app::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tribell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
