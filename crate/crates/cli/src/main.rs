//! `mwforge`: compile pulse programs, synthesize the DDS output, and emit
//! spectra, noise budgets and atom responses as CSV/JSON.
//!
//! Exit codes: 0 ok, 1 parse, 2 semantic, 3 capacity, 4 numeric/range, 5 I/O.

mod cmd_bloch;
mod cmd_compile;
mod cmd_noise;
mod cmd_ripple;
mod cmd_spectrum;
mod fail;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mwforge", version, about = "DDS microwave-source simulator and pulse compiler")]
struct Cli {
    /// Directory searched for default configs (compiler.toml, pulse.toml, dressing.toml, budget.toml, atom.toml).
    #[arg(long, global = true, env = "MWFORGE_CONFIG_DIR")]
    config_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Compile(cmd_compile::CompileArgs),
    Spectrum(cmd_spectrum::SpectrumArgs),
    Noise(cmd_noise::NoiseArgs),
    SynthNoise(cmd_noise::SynthNoiseArgs),
    Bloch(cmd_bloch::BlochArgs),
    CalibrateRipple(cmd_ripple::RippleArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(fail::PARSE),
            };
        }
    };
    let dir = cli.config_dir.as_deref();
    let result = match &cli.command {
        Command::Compile(a) => cmd_compile::run(a, dir),
        Command::Spectrum(a) => cmd_spectrum::run(a, dir),
        Command::Noise(a) => cmd_noise::run(a, dir),
        Command::SynthNoise(a) => cmd_noise::run_synth(a),
        Command::Bloch(a) => cmd_bloch::run(a, dir),
        Command::CalibrateRipple(a) => cmd_ripple::run(a, dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
