use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use mwforge_core::atom::{composite_scan, evolve, excitation_profile, BlochState, DriveField};
use mwforge_core::dds::synthesize;
use serde::Deserialize;

use crate::fail::{Failure, PARSE, SEMANTIC};
use crate::input::{carrier, compiler_config, emit, load_schedule, locate, parse_toml};

/// Two-level-atom response to a compiled, synthesized schedule.
#[derive(Debug, Args)]
pub struct BlochArgs {
    /// Schedule JSON or pulse program source; optional when only a composite scan is configured.
    pub input: Option<PathBuf>,
    /// Atom config (Rabi calibration, detuning, sweeps). Defaults to atom.toml in the config directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Compiler config used for program sources and register decoding.
    #[arg(long)]
    pub compiler: Option<PathBuf>,
    /// Output directory for trajectory.csv, profile.csv and fidelity.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Rates and detunings are angular (rad/s).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomConfig {
    /// Rabi rate at full-scale DDS amplitude.
    rabi_peak: Option<f64>,
    #[serde(default)]
    detuning: f64,
    /// Demodulation frequency, Hz; the first programmed frequency when absent.
    f_ref: Option<f64>,
    #[serde(default = "default_rate")]
    sample_rate: f64,
    /// Integration step; the stability bound when absent.
    dt: Option<f64>,
    sweep: Option<Grid>,
    composite: Option<Composite>,
}

fn default_rate() -> f64 {
    1e9
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Grid {
    min: f64,
    max: f64,
    points: usize,
}

impl Grid {
    fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Composite {
    /// `(area, phase)` pairs in radians.
    sequence: Vec<(f64, f64)>,
    amp_errors: Grid,
    detunings: Grid,
}

pub fn run(args: &BlochArgs, config_dir: Option<&Path>) -> Result<(), Failure> {
    let cfg: AtomConfig = match locate(args.config.as_deref(), config_dir, "atom.toml") {
        Some(p) => parse_toml(&p)?,
        None => AtomConfig::default(),
    };
    let rabi = cfg
        .rabi_peak
        .ok_or_else(|| Failure::new(SEMANTIC, "atom: rabi_peak is not calibrated; set it in the atom config"))?;
    if args.input.is_none() && cfg.composite.is_none() {
        return Err(Failure::new(PARSE, "bloch: nothing to simulate; give a schedule or a [composite] section"));
    }

    if let Some(input) = &args.input {
        let ccfg = compiler_config(locate(args.compiler.as_deref(), config_dir, "compiler.toml"))?;
        let schedule = load_schedule(input, &ccfg)?;
        let env = synthesize(&schedule, &ccfg.clock, cfg.sample_rate)?;
        let f_ref = cfg.f_ref.or(carrier(&schedule, &ccfg.clock).0).unwrap_or(0.0);
        let drive = DriveField::from_envelope(&env, rabi, f_ref, cfg.detuning);
        let duration = env.duration_s();
        let dt = cfg.dt.unwrap_or_else(|| drive.max_step().min(1.0 / cfg.sample_rate));
        let traj = evolve(BlochState::GROUND, &drive, duration, dt)?;
        emit(Some(&args.out.join("trajectory.csv")), &traj.to_csv())?;
        println!("final excited population {:.9}", traj.last().excited_population());

        if let Some(sweep) = &cfg.sweep {
            let profile = excitation_profile(&drive, duration, &sweep.values(), dt)?;
            let mut text = String::from("detuning_rad_s,p_excited\n");
            for (d, p) in profile {
                let _ = writeln!(text, "{d},{p}");
            }
            emit(Some(&args.out.join("profile.csv")), &text)?;
        }
    }

    if let Some(c) = &cfg.composite {
        let map = composite_scan(&c.sequence, rabi, &c.amp_errors.values(), &c.detunings.values())?;
        emit(Some(&args.out.join("fidelity.csv")), &map.to_csv())?;
    }
    Ok(())
}
