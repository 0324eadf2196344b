use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use softkey_cli::{execute, Cli, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    let (output, out_path) = execute(&cli.command)?;
    if let Some((path, json)) = &output.log {
        std::fs::write(path, json)?;
    }
    match out_path {
        Some(path) => {
            std::fs::write(&path, &output.csv)?;
            for note in &output.notes {
                println!("{note}");
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.csv.as_bytes())?;
            for note in &output.notes {
                eprintln!("{note}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("softkey: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
