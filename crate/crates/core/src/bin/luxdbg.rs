use std::fs::File;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use luxdbg::service;

/// Interactive multi-processor debugger with a Tcl-style extension language.
#[derive(Parser)]
#[command(name = "luxdbg", version)]
struct Cli {
    /// Run a script; trailing arguments become `argv`.
    #[arg(long, value_name = "FILE")]
    script: Option<PathBuf>,
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, requires = "script")]
    args: Vec<String>,
    /// Serve the line-delimited JSON protocol (and WebSocket upgrades) on this port.
    #[arg(long, value_name = "PORT")]
    listen: Option<u16>,
    /// Append the kernel event log to FILE.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
    /// Read commands from stdin without a prompt.
    #[arg(long)]
    batch: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut i = luxdbg::session();
    if let Some(path) = &cli.log {
        match File::create(path) {
            Ok(f) => i.host.set_log_file(f),
            Err(e) => {
                eprintln!("luxdbg: cannot open log {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    let mut code = 0;
    if let Some(script) = &cli.script {
        code = service::run_script(&mut i, script, &cli.args);
        if code != 0 || cli.listen.is_none() {
            return ExitCode::from(code as u8);
        }
    }
    if let Some(port) = cli.listen {
        if let Err(e) = service::serve(&mut i, port) {
            eprintln!("luxdbg: {e}");
            return ExitCode::from(1);
        }
        return ExitCode::SUCCESS;
    }
    if cli.script.is_none() {
        let stdin = io::BufReader::new(io::stdin());
        code = service::repl(&mut i, stdin, &mut io::stdout(), !cli.batch);
    }
    ExitCode::from(code as u8)
}
