use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = infblock_cli::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = infblock_cli::run(&cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("infblock: some cells failed or hit solver limits");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("infblock: {e:#}");
            ExitCode::from(2)
        }
    }
}
