use clap::{Parser, Subcommand};
use liquid_cli::commands::{self, DelegateArgs, SimulateArgs, TallyArgs};
use liquid_cli::CliError;
use liquid_core::model::io::load_election;
use std::path::PathBuf;
use std::process::ExitCode;

/// Liquid-democracy tallies, delegation resolution and hierarchy simulation.
#[derive(Parser)]
#[command(name = "liquid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tally a ballots file and write the round report.
    Tally(TallyArgs),
    /// Resolve a delegation graph.
    Delegate(DelegateArgs),
    /// Simulate a topic hierarchy and report delegation workloads.
    Simulate(SimulateArgs),
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Election used when a request does not carry one.
        #[arg(long)]
        election: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let artifacts = match cli.command {
        Command::Tally(a) => commands::tally(&a)?,
        Command::Delegate(a) => commands::delegate(&a)?,
        Command::Simulate(a) => commands::simulate(&a)?,
        Command::Serve { port, election } => {
            let election = election.map(|p| load_election(&p)).transpose()?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Input(e.to_string()))?;
            return rt
                .block_on(liquid_cli::server::serve(port, election))
                .map_err(|e| CliError::Input(format!("port {port}: {e}")));
        }
    };
    artifacts.emit(&mut std::io::stdout().lock())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("liquid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
