//! Phase and amplitude noise spectra: tables, closed-form integration,
//! frequency multiplication, power sums and time-domain synthesis.
//!
//! Levels are single-sideband `L(f)` in dBc/Hz. The one-sided density is
//! `S(f) = 2 * 10^(L/10)`; that conversion lives in [`ssb_to_density`] only.

mod budget;
mod spectrum;
mod synth;

use thiserror::Error;

pub use budget::{crossover, BudgetConfig, BudgetReport, DecadeDominance, NoiseBudget, Source};
pub use spectrum::{combine, load_noise_table, ssb_to_density, NoiseKind, NoisePoint, NoiseSpectrum};
pub use synth::{synthesize_noise, Extension, NoiseSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise table has no rows")]
    EmptyTable,
    #[error("noise table needs at least two rows")]
    TooFewPoints,
    #[error("row {row}: frequency {f} Hz does not increase")]
    NonMonotonicFrequency { row: usize, f: f64 },
    #[error("malformed noise table: {0}")]
    MalformedTable(String),
    #[error("band {f1}..{f2} Hz outside table range {lo}..{hi} Hz")]
    RangeOutsideTable { f1: f64, f2: f64, lo: f64, hi: f64 },
    #[error("invalid band {f1}..{f2}")]
    InvalidBand { f1: f64, f2: f64 },
    #[error("multiplication factor must be >= 1, got {0}")]
    InvalidFactor(f64),
    #[error("spectra do not overlap")]
    DisjointRanges,
    #[error("cannot combine phase and amplitude spectra")]
    KindMismatch,
    #[error("Nyquist frequency {nyquist} Hz is below the last breakpoint {f_max} Hz")]
    NyquistViolation { nyquist: f64, f_max: f64 },
    #[error("invalid budget configuration: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Io(String),
}
