use std::process::ExitCode;

use clap::Parser;
use forge_cli::{execute, render, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, diagnostic) = execute(&cli);
    let text = render(&cli, &report);
    let mut code = report.status.exit_code();
    match &cli.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("forge: cannot write {}: {e}", path.display());
                code = 2;
            }
        }
        None => print!("{text}"),
    }
    if let Some(line) = diagnostic {
        eprintln!("forge: {line}");
    }
    ExitCode::from(code as u8)
}
