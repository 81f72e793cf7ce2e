use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::DdsError;

pub const FTW_BITS: u32 = 32;
pub const ASF_BITS: u32 = 14;
pub const POW_BITS: u32 = 16;

/// Largest ASF value; `amp = 1.0` maps here so full scale is representable.
pub const ASF_FULL_SCALE: u16 = (1 << ASF_BITS) - 1;

const FTW_SPAN: f64 = (1u64 << FTW_BITS) as f64;
const POW_SPAN: f64 = (1u32 << POW_BITS) as f64;
/// First FTW that reaches the Nyquist frequency.
const FTW_NYQUIST: u32 = 1 << (FTW_BITS - 1);

/// DDS system clock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClock", into = "RawClock")]
pub struct SysClock {
    f_sys: f64,
}

#[derive(Serialize, Deserialize)]
struct RawClock {
    f_sys: f64,
}

impl TryFrom<RawClock> for SysClock {
    type Error = DdsError;
    fn try_from(raw: RawClock) -> Result<Self, Self::Error> {
        SysClock::new(raw.f_sys)
    }
}

impl From<SysClock> for RawClock {
    fn from(clk: SysClock) -> Self {
        RawClock { f_sys: clk.f_sys }
    }
}

impl SysClock {
    pub fn new(f_sys: f64) -> Result<Self, DdsError> {
        if f_sys.is_finite() && f_sys > 0.0 {
            Ok(Self { f_sys })
        } else {
            Err(DdsError::InvalidClock(f_sys))
        }
    }

    pub fn f_sys(&self) -> f64 {
        self.f_sys
    }

    pub fn nyquist(&self) -> f64 {
        self.f_sys / 2.0
    }

    /// Frequency of one FTW LSB.
    pub fn ftw_to_hz(&self, ftw: u32) -> f64 {
        ftw as f64 * self.f_sys / FTW_SPAN
    }
}

impl Default for SysClock {
    fn default() -> Self {
        Self { f_sys: 1e9 }
    }
}

/// Quantized DDS settings.
///
/// Invariants: `asf <= 2^14 - 1`, and `ftw < 2^31` so the programmed
/// frequency stays strictly below `f_sys / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawWords", into = "RawWords")]
pub struct RegisterWords {
    ftw: u32,
    asf: u16,
    pow: u16,
}

#[derive(Serialize, Deserialize)]
struct RawWords {
    ftw: u32,
    asf: u16,
    pow: u16,
}

impl TryFrom<RawWords> for RegisterWords {
    type Error = DdsError;
    fn try_from(raw: RawWords) -> Result<Self, Self::Error> {
        RegisterWords::new(raw.ftw, raw.asf, raw.pow)
    }
}

impl From<RegisterWords> for RawWords {
    fn from(w: RegisterWords) -> Self {
        RawWords { ftw: w.ftw, asf: w.asf, pow: w.pow }
    }
}

impl RegisterWords {
    pub fn new(ftw: u32, asf: u16, pow: u16) -> Result<Self, DdsError> {
        if asf > ASF_FULL_SCALE {
            return Err(DdsError::InvalidWord(format!("asf {asf} exceeds 14 bits")));
        }
        if ftw >= FTW_NYQUIST {
            return Err(DdsError::InvalidWord(format!("ftw {ftw:#010x} is at or above the Nyquist word")));
        }
        Ok(Self { ftw, asf, pow })
    }

    pub const ZERO: RegisterWords = RegisterWords { ftw: 0, asf: 0, pow: 0 };

    pub fn ftw(&self) -> u32 {
        self.ftw
    }

    pub fn asf(&self) -> u16 {
        self.asf
    }

    pub fn pow(&self) -> u16 {
        self.pow
    }
}

/// Physical settings recovered from register words.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

/// Quantize frequency (Hz), amplitude (fraction of full scale) and phase (rad)
/// to register words, rounding to nearest with ties away from zero.
pub fn quantize_settings(freq: f64, amp: f64, phase: f64, clk: &SysClock) -> Result<RegisterWords, DdsError> {
    let out_of_range = || DdsError::FrequencyOutOfRange { freq, nyquist: clk.nyquist() };
    if !(0.0..clk.nyquist()).contains(&freq) {
        return Err(out_of_range());
    }
    if !(0.0..=1.0).contains(&amp) {
        return Err(DdsError::AmplitudeOutOfRange(amp));
    }
    if !phase.is_finite() {
        return Err(DdsError::PhaseNotFinite(phase));
    }

    // f64::round rounds half away from zero.
    let ftw = (freq / clk.f_sys() * FTW_SPAN).round();
    if ftw >= FTW_NYQUIST as f64 {
        return Err(out_of_range());
    }
    let asf = (amp * ASF_FULL_SCALE as f64).round() as u16;
    let turns = phase.rem_euclid(TAU) / TAU;
    let pow = ((turns * POW_SPAN).round() as u32 % (1 << POW_BITS)) as u16;

    RegisterWords::new(ftw as u32, asf, pow)
}

/// Inverse of [`quantize_settings`].
pub fn dequantize(words: &RegisterWords, clk: &SysClock) -> Settings {
    Settings {
        frequency: clk.ftw_to_hz(words.ftw),
        amplitude: asf_to_fraction(words.asf),
        phase: pow_to_rad(words.pow),
    }
}

pub(crate) fn asf_to_fraction(asf: u16) -> f64 {
    asf as f64 / ASF_FULL_SCALE as f64
}

pub(crate) fn pow_to_rad(pow: u16) -> f64 {
    pow as f64 * TAU / POW_SPAN
}

pub(crate) fn pow_to_turns(pow: u16) -> f64 {
    pow as f64 / POW_SPAN
}

/// Frequency step of one FTW LSB, `f_sys / 2^32`.
pub fn frequency_resolution(clk: &SysClock) -> f64 {
    clk.f_sys() / FTW_SPAN
}

/// Amplitude step of one ASF LSB, `1 / (2^14 - 1)`.
pub fn amplitude_resolution() -> f64 {
    1.0 / ASF_FULL_SCALE as f64
}

/// Phase step of one POW LSB, `2*pi / 2^16` rad.
pub fn phase_resolution() -> f64 {
    TAU / POW_SPAN
}
