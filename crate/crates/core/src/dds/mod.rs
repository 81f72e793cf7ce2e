//! Bit-accurate model of one DDS channel.
//!
//! Register words follow the 32/14/16-bit layout of the synthesizer:
//! a frequency tuning word (FTW), an amplitude scale factor (ASF) and a phase
//! offset word (POW). RAM profiles hold up to 1024 32-bit words that are
//! played back with a fixed step on the 4 ns grid.

mod envelope;
mod ram;
mod synth;
mod words;

pub use envelope::ComplexEnvelope;
pub(crate) use ram::blackman;
pub use ram::{build_ram_profile, RamMode, RamProfile, RamSample, Shape, GRID_NS, RAM_DEPTH};
pub use synth::{synthesize, synthesize_chunked, synthesize_with, PhaseMode, SynthConfig};
pub use words::{
    amplitude_resolution, dequantize, frequency_resolution, phase_resolution, quantize_settings, RegisterWords,
    Settings, SysClock, ASF_BITS, ASF_FULL_SCALE, FTW_BITS, POW_BITS,
};

use thiserror::Error;

/// Errors raised by the DDS model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdsError {
    #[error("frequency {freq} Hz is outside [0, {nyquist}) Hz")]
    FrequencyOutOfRange { freq: f64, nyquist: f64 },
    #[error("amplitude {0} is outside [0, 1]")]
    AmplitudeOutOfRange(f64),
    #[error("phase {0} is not finite")]
    PhaseNotFinite(f64),
    #[error("system clock must be positive and finite, got {0} Hz")]
    InvalidClock(f64),
    #[error("invalid register word: {0}")]
    InvalidWord(String),
    #[error("RAM profile needs {needed} words but holds at most {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },
    #[error("timing off the {grid} ns grid: {detail}")]
    GridViolation { grid: u64, detail: String },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("sample rate {rate} Hz is below 4x the highest programmed frequency {max_freq} Hz")]
    SampleRateTooLow { rate: f64, max_freq: f64 },
    #[error("schedule failed validation: {0}")]
    UnvalidatedSchedule(String),
    #[error("malformed RAM table: {0}")]
    MalformedTable(String),
}
