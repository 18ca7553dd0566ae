use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use omnisurf_harness::commands::{self, CommandOutput};
use omnisurf_harness::verify::run_all;
use omnisurf_harness::{Execution, HarnessError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "omnisurf", version, about = "Omni-surface codebook design, beam training and rate sweeps")]
struct Cli {
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the hierarchical codebook.
    DesignCodebook { config: PathBuf },
    /// Train the configured users on the first drop and write the report.
    Train { config: PathBuf },
    /// Run the SNR sweep over all configured schemes.
    Sweep { config: PathBuf },
    /// Write the beam gain over a slice through the surface.
    Gainmap { config: PathBuf },
    /// Run the built-in checks; exits non-zero if any fails.
    Verify,
}

fn run(cli: Cli) -> Result<Option<CommandOutput>, HarnessError> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let out = match cli.command {
        Command::DesignCodebook { config } => commands::design_codebook(&ScenarioConfig::load(&config)?)?,
        Command::Train { config } => commands::train(&ScenarioConfig::load(&config)?)?,
        Command::Sweep { config } => commands::sweep(&ScenarioConfig::load(&config)?, exec)?,
        Command::Gainmap { config } => commands::gainmap(&ScenarioConfig::load(&config)?)?,
        Command::Verify => {
            let reports = run_all(exec);
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(HarnessError::Numerical(format!("{failed} check(s) failed")));
            }
            return Ok(None);
        }
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(out)) => {
            println!("{}", out.message);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
