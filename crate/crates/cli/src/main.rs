use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qtunnel_cli::{commands, CliError, Output, Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "qtunnel",
    version,
    about = "Quantum tunneling circuits: simulate, compile, mitigate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Position distribution after every Trotter step.
    Simulate(Common),
    /// Noisy run on a chip with zero-noise extrapolation.
    Endtoend(Common),
    /// Readout error mitigation of the final distribution.
    Rem(Common),
    /// Compile the evolution circuit for each target chip.
    Transpile(Common),
    /// Real and imaginary amplitude masses via the Hadamard test.
    Hadamard(Common),
    /// Place the folded circuits of the ZNE sweep on the chip.
    Pack(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `out` from the config, else `results`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    shots: Option<u64>,
}

type Handler = fn(&ScenarioConfig) -> Result<Output, CliError>;

fn run(cli: Cli) -> Result<Output, CliError> {
    let (common, f): (&Common, Handler) = match &cli.command {
        Command::Simulate(c) => (c, commands::simulate),
        Command::Endtoend(c) => (c, commands::endtoend),
        Command::Rem(c) => (c, commands::rem),
        Command::Transpile(c) => (c, commands::transpile),
        Command::Hadamard(c) => (c, commands::hadamard),
        Command::Pack(c) => (c, commands::pack_cmd),
    };
    let mut cfg = ScenarioConfig::load(&common.config)?;
    cfg.apply(&Overrides {
        seed: common.seed,
        shots: common.shots,
        out: common.out.clone(),
    });
    cfg.validate()?;
    let out = f(&cfg)?;
    let dir = cfg.out_dir();
    out.write_to(&dir)?;
    for line in &out.summary {
        println!("{line}");
    }
    for (name, _) in &out.files {
        println!("wrote {}", dir.join(name).display());
    }
    Ok(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtunnel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
