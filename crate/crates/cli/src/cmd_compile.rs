use std::path::PathBuf;

use clap::Args;
use mwforge_core::compiler::compile;

use crate::fail::Failure;
use crate::input::{compiler_config, emit, locate, read};

/// Compile a pulse program into an event schedule.
#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Pulse program source.
    pub program: PathBuf,
    /// Compiler config (clock, latencies). Defaults to compiler.toml in the config directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Schedule JSON destination; stdout when absent (the timing report then goes to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &CompileArgs, config_dir: Option<&std::path::Path>) -> Result<(), Failure> {
    let cfg = compiler_config(locate(args.config.as_deref(), config_dir, "compiler.toml"))?;
    let compiled = compile(&read(&args.program)?, &cfg)?;
    let mut json = compiled.schedule.to_json();
    json.push('\n');
    emit(args.out.as_deref(), &json)?;
    if args.out.is_some() {
        print!("{}", compiled.timing_report());
    } else {
        eprint!("{}", compiled.timing_report());
    }
    Ok(())
}
