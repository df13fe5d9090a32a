use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use commands::Output;
use config::{Loaded, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "adomian",
    version,
    about = "Series solutions of u_t = alpha u_xx + beta |u|^2 u_x"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Taylor coefficients v_0..v_N.
    Expand(Common),
    /// Error table of partial sums against the RK4 reference.
    Compare(Common),
    /// Compare the complex series with the real-split series.
    IadmCheck(Common),
    /// Root-test radius and the small-t validity verdict.
    Radius(Common),
    /// Series coefficients against finite-difference estimates.
    Oracle(Common),
    /// PDE residual of the travelling-wave spec.
    SolitonValidate(Common),
}

type Body = fn(&Loaded) -> Result<Vec<Output>, CliError>;

fn write_outputs(dir: &Path, outputs: &[Output]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for out in outputs {
        let path = dir.join(out.name);
        fs::write(&path, &out.body)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, body): (&Common, Body) = match &cli.command {
        Command::Expand(c) => (c, commands::expand),
        Command::Compare(c) => (c, commands::compare),
        Command::IadmCheck(c) => (c, commands::iadm_check),
        Command::Radius(c) => (c, commands::radius),
        Command::Oracle(c) => (c, commands::oracle),
        Command::SolitonValidate(c) => (c, commands::soliton_validate),
    };
    let loaded = RunConfig::load(&common.config)?;
    let outputs = body(&loaded)?;
    write_outputs(&common.out, &outputs)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
