use std::process::ExitCode;

use clap::Parser;
use lyl_cli::config::{Args, RunConfig};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = RunConfig::from_args(&args).and_then(|cfg| lyl_cli::run(&cfg));
    match result {
        Ok(summary) => {
            for line in summary.lines {
                println!("{line}");
            }
            ExitCode::from(summary.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
