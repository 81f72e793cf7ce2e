use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use mwforge_core::dds::{synthesize_chunked, SynthConfig};
use mwforge_core::noise::{load_noise_table, synthesize_noise, Extension, NoiseKind, NoiseSeries, Source};
use mwforge_core::rf::{ChainConfig, SpectrumAnalyzer};
use mwforge_core::Complex64;

use crate::fail::{Failure, SEMANTIC};
use crate::input::{carrier, compiler_config, emit, load_schedule, locate, parse_toml, read};

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RfPath {
    Pulse,
    Dressing,
}

/// Synthesize a schedule, pass it through an RF path and write its spectrum.
#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Schedule JSON (from `compile`) or pulse program source.
    pub input: PathBuf,
    /// Chain config. Defaults to <path>.toml in the config directory, else the built-in path.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in RF path used when no chain config is found.
    #[arg(long, value_enum, default_value_t = RfPath::Pulse)]
    pub path: RfPath,
    /// Compiler config used for program sources and register decoding.
    #[arg(long)]
    pub compiler: Option<PathBuf>,
    /// Resolution bandwidth, Hz.
    #[arg(long, default_value_t = 10e3)]
    pub rbw: f64,
    /// Baseband sample rate, Hz.
    #[arg(long, default_value_t = 800e6)]
    pub sample_rate: f64,
    /// Multiply the envelope by exp(i phi(t)) drawn from a phase-noise table.
    #[arg(long)]
    pub with_phase_noise: bool,
    /// Phase-noise table for --with-phase-noise; the shipped output-path table when absent.
    #[arg(long)]
    pub noise_table: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spectrum CSV destination; stdout when absent (the line summary then goes to stderr).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn chain_config(args: &SpectrumArgs, config_dir: Option<&Path>) -> Result<ChainConfig, Failure> {
    let (name, builtin) = match args.path {
        RfPath::Pulse => ("pulse.toml", ChainConfig::pulse_path()),
        RfPath::Dressing => ("dressing.toml", ChainConfig::dressing_path()),
    };
    load_chain(locate(args.config.as_deref(), config_dir, name), builtin)
}

pub fn load_chain(path: Option<PathBuf>, builtin: ChainConfig) -> Result<ChainConfig, Failure> {
    let Some(p) = path else { return Ok(builtin) };
    let cfg: ChainConfig = parse_toml(&p)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Phase series covering `duration` seconds, sampled at four times the
/// table's last breakpoint.
fn phase_series(table: Option<&Path>, duration: f64, seed: u64) -> Result<NoiseSeries, Failure> {
    let spec = match table {
        Some(p) => load_noise_table(&read(p)?, NoiseKind::Phase)?,
        None => Source::OutputPath.builtin(),
    };
    let rate = 4.0 * spec.f_max();
    let values = synthesize_noise(&spec, duration.max(2.0 / rate), rate, seed, Extension::Zero)?;
    Ok(NoiseSeries { sample_rate: rate, values })
}

pub fn run(args: &SpectrumArgs, config_dir: Option<&Path>) -> Result<(), Failure> {
    let chain = chain_config(args, config_dir)?;
    let ccfg = compiler_config(locate(args.compiler.as_deref(), config_dir, "compiler.toml"))?;
    let schedule = load_schedule(&args.input, &ccfg)?;
    let (f_dds, amp) = carrier(&schedule, &ccfg.clock);
    let f_dds = f_dds.ok_or_else(|| Failure::new(SEMANTIC, "spectrum: schedule never loads the registers"))?;

    let fs = args.sample_rate;
    let mut analyzer = SpectrumAnalyzer::new(&chain, fs, args.rbw, amp)?;
    let noise = match args.with_phase_noise {
        true => Some(phase_series(args.noise_table.as_deref(), schedule.total_duration_ns as f64 * 1e-9, args.seed)?),
        false => None,
    };
    let mut k = 0usize;
    let mut buf = Vec::with_capacity(CHUNK);
    let total = synthesize_chunked(&schedule, &ccfg.clock, fs, &SynthConfig::default(), CHUNK, |chunk| match &noise {
        Some(phi) => {
            buf.clear();
            buf.extend(
                chunk.iter().enumerate().map(|(i, s)| s * Complex64::from_polar(1.0, phi.at((k + i) as f64 / fs))),
            );
            k += chunk.len();
            analyzer.push(&buf);
        }
        None => analyzer.push(chunk),
    })?;
    let est = analyzer.finish(total)?;

    let lo = est.line_level(chain.f_lo);
    let usb = est.line_level(chain.f_lo + f_dds);
    let summary = format!(
        "carrier {:.6} MHz\nlo_leak {:.6} MHz {lo:.2} dBc\nusb {:.6} MHz {usb:.2} dBc\nrbw {:.1} Hz, {} samples\n",
        est.carrier_frequency() / 1e6,
        chain.f_lo / 1e6,
        (chain.f_lo + f_dds) / 1e6,
        est.rbw,
        total,
    );
    emit(args.out.as_deref(), &est.to_csv())?;
    if args.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}
