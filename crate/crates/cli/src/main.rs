use std::process::ExitCode;

use clap::Parser;
use unemp_cli::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("unemp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
