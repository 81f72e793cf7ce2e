use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use mwforge_core::noise::{
    load_noise_table, synthesize_noise, BudgetConfig, Extension, NoiseBudget, NoiseKind, NoiseSpectrum, Source,
};

use crate::fail::Failure;
use crate::input::{emit, locate, parse_band, parse_toml, read};

/// Integrated phase-noise budget per source.
#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Budget config (table paths, band, contributors). Defaults to budget.toml in the config directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Integration band `f1:f2` in Hz; overrides the config.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
    /// Integrate this single table instead of the budget.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Per-source CSV destination (`source,rms_rad`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &NoiseArgs, config_dir: Option<&Path>) -> Result<(), Failure> {
    let path = locate(args.config.as_deref(), config_dir, "budget.toml");
    let cfg: BudgetConfig = match &path {
        Some(p) => parse_toml(p)?,
        None => BudgetConfig::default(),
    };
    let (f1, f2) = args.band.unwrap_or(cfg.band);

    if let Some(t) = &args.table {
        let spec = load_noise_table(&read(t)?, NoiseKind::Phase)?;
        let rms = spec.integrate_rms(f1, f2)?;
        println!("integrated phase noise, {f1} Hz to {f2} Hz\n  {:<12} {:>10.1} urad", "table", rms * 1e6);
        return emit_csv(args.out.as_deref(), &[("table", rms)]);
    }

    let base = path.as_deref().and_then(Path::parent).unwrap_or(Path::new("."));
    let budget = NoiseBudget::from_config(&cfg, base)?;
    let report = budget.report(f1, f2)?;
    print!("{report}");
    let mut rows: Vec<(&str, f64)> = report.rms.iter().map(|(s, r)| (s.name(), *r)).collect();
    rows.push(("combined", report.combined_rms));
    emit_csv(args.out.as_deref(), &rows)
}

fn emit_csv(out: Option<&Path>, rows: &[(&str, f64)]) -> Result<(), Failure> {
    let Some(out) = out else { return Ok(()) };
    let mut text = String::from("source,rms_rad\n");
    for (name, rms) in rows {
        let _ = writeln!(text, "{name},{rms:e}");
    }
    emit(Some(out), &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ext {
    Zero,
    Flat,
}

/// Time-domain noise series whose PSD follows a table.
#[derive(Debug, Args)]
pub struct SynthNoiseArgs {
    /// Noise table CSV (`f_hz,level_dbc_hz[,floor]`).
    #[arg(long, conflicts_with = "source")]
    pub table: Option<PathBuf>,
    /// Shipped table to use when --table is absent.
    #[arg(long, value_parser = parse_source, default_value = "output_path")]
    pub source: Source,
    /// Restrict the table to `f1:f2` Hz before synthesis.
    #[arg(long, value_parser = parse_band)]
    pub band: Option<(f64, f64)>,
    /// Record length, seconds.
    #[arg(long, default_value_t = 1e-3)]
    pub duration: f64,
    /// Sample rate, Hz.
    #[arg(long, default_value_t = 4e6)]
    pub sample_rate: f64,
    /// Spectrum assumed above the last breakpoint.
    #[arg(long, value_enum, default_value_t = Ext::Zero)]
    pub extension: Ext,
    /// Amplitude-noise table rather than phase noise.
    #[arg(long)]
    pub amplitude: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Series CSV destination (`t_s,value`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_source(s: &str) -> Result<Source, String> {
    Source::ALL
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| format!("unknown source `{s}`, expected one of ref_100MHz, lo_7GHz, dds, output_path"))
}

pub fn run_synth(args: &SynthNoiseArgs) -> Result<(), Failure> {
    let kind = if args.amplitude { NoiseKind::Amplitude } else { NoiseKind::Phase };
    let mut spec: NoiseSpectrum = match &args.table {
        Some(p) => load_noise_table(&read(p)?, kind)?,
        None => load_noise_table(args.source.builtin_table(), kind)?,
    };
    if let Some((f1, f2)) = args.band {
        spec = spec.restrict(f1, f2)?;
    }
    let ext = match args.extension {
        Ext::Zero => Extension::Zero,
        Ext::Flat => Extension::Flat,
    };
    let values = synthesize_noise(&spec, args.duration, args.sample_rate, args.seed, ext)?;
    let mut text = String::with_capacity(32 * values.len() + 16);
    text.push_str("t_s,value\n");
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(text, "{:e},{v:e}", k as f64 / args.sample_rate);
    }
    emit(args.out.as_deref(), &text)
}
