use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use equivar_cli::commands::{render, run, Cli};
use equivar_cli::report::EXIT_PARSE;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let report = run(&cli);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(render(&cli, &report).as_bytes());
    let _ = out.flush();
    ExitCode::from(report.exit_code as u8)
}
