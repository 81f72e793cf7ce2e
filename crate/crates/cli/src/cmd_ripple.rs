use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use mwforge_core::rf::{passband_gain, ChainConfig};

use crate::cmd_spectrum::load_chain;
use crate::fail::{Failure, SEMANTIC};
use crate::input::{emit, locate};

/// Amplitude-calibration table that flattens the filter passband ripple.
#[derive(Debug, Args)]
pub struct RippleArgs {
    /// Chain config. Defaults to pulse.toml in the config directory, else the built-in pulse path.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Half-width of the table around the filter centre, Hz.
    #[arg(long, default_value_t = 25e6)]
    pub span: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// CSV destination (`f_hz,offset_hz,gain_db,correction_db`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &RippleArgs, config_dir: Option<&Path>) -> Result<(), Failure> {
    let chain = load_chain(locate(args.config.as_deref(), config_dir, "pulse.toml"), ChainConfig::pulse_path())?;
    if !(args.span > 0.0 && args.span.is_finite()) || args.points < 2 {
        return Err(Failure::new(SEMANTIC, "calibrate-ripple: need span > 0 and at least 2 points"));
    }
    let f0 = chain.filter.f_center;
    let mut text = String::from("f_hz,offset_hz,gain_db,correction_db\n");
    for i in 0..args.points {
        let d = -args.span + 2.0 * args.span * i as f64 / (args.points - 1) as f64;
        // `+ 0.0` folds -0 into 0 so the table has no signed zeros
        let g = passband_gain(f0 + d, &chain.filter) + 0.0;
        let _ = writeln!(text, "{:.1},{d:.1},{g:.6},{:.6}", f0 + d, 0.0 - g);
    }
    emit(args.out.as_deref(), &text)
}
