use std::path::PathBuf;
use std::process::ExitCode;

use adan_cli::{cmd_run, cmd_sweep, cmd_verify, Options};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adan-bench", version, about = "Run Adan benchmarks and check its convergence certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if absent
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run one experiment and write a trace CSV per seed
    Run,
    /// Run certificate checks and write a pass/fail report
    Verify,
    /// Run a complexity or momentum sweep and write a summary CSV
    Sweep,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { adan_cli::EXIT_CONFIG } else { adan_cli::EXIT_OK });
        }
    };
    let Some(config) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(adan_cli::EXIT_CONFIG);
    };
    let opts = Options {
        config,
        out: cli.out,
        quiet: cli.quiet,
    };
    let code = match cli.command {
        Command::Run => cmd_run(&opts),
        Command::Verify => cmd_verify(&opts),
        Command::Sweep => cmd_sweep(&opts),
    };
    ExitCode::from(code)
}
