//! Analog chain after the DDS: mixing against the 7 GHz LO, spur
//! generation, bandpass filtering and the resulting RF spectrum.

mod chain;
mod filter;
mod spectrum;

use thiserror::Error;

pub use chain::{calibrate, mix_spurs, ChainConfig, MixerKind, PathName, Spur, SpurKind, SpurTargets};
pub use filter::{apply_filter, attenuation, passband_gain, Attenuable, FilterConfig, RippleSpec};
pub use spectrum::{output_spectrum, SpectrumAnalyzer, SpectrumEstimate, KAISER_BETA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RfError {
    #[error("resolution bandwidth needs {needed} samples per segment but only {available} are available")]
    InsufficientLength { needed: usize, available: usize },
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::dds::ComplexEnvelope;
    use crate::Complex64;

    fn tone(f: f64, amp: f64, fs: f64, n: usize) -> ComplexEnvelope {
        let samples = (0..n).map(|k| Complex64::from_polar(amp, TAU * f * k as f64 / fs)).collect();
        ComplexEnvelope { sample_rate: fs, t0_ns: 0.0, samples }
    }

    fn clean(mut cfg: ChainConfig) -> ChainConfig {
        cfg.lo_leak_dbc = Some(f64::NEG_INFINITY);
        cfg.usb_level_dbc = Some(f64::NEG_INFINITY);
        cfg
    }

    #[test]
    fn pure_tone_single_line() {
        let cfg = clean(ChainConfig::pulse_path());
        let fs = 800e6;
        let env = tone(165e6 + 12_345.0, 0.7, fs, 1 << 17);
        let s = output_spectrum(&env, &cfg, 200e3).unwrap();
        assert!(s.bins.windows(2).all(|w| w[0].0 < w[1].0));
        let fc = s.carrier_frequency();
        assert!((fc - (6.835e9 - 12_345.0)).abs() <= s.bin_width);
        assert_eq!(s.peak_near(fc, 0.0), 0.0);
        let far = s
            .bins
            .iter()
            .filter(|(f, _)| (f - fc).abs() > 8.0 * s.bin_width)
            .map(|&(_, p)| p)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(far < -100.0, "leakage floor {far}");
    }

    #[test]
    fn parseval_total_power() {
        let cfg = clean(ChainConfig::pulse_path());
        for (f, a) in [(165e6, 1.0), (165e6 + 33_333.3, 0.3)] {
            let env = tone(f, a, 800e6, 1 << 17);
            let s = output_spectrum(&env, &cfg, 400e3).unwrap();
            let db = 10.0 * (s.total_power() / env.mean_square()).log10();
            assert!(db.abs() < 0.1, "{db} dB");
        }
    }

    #[test]
    fn recovers_calibrated_spurs() {
        let env = tone(165e6, 1.0, 800e6, 1 << 17);
        for (cfg, lo, usb) in [(ChainConfig::pulse_path(), -67.0, -87.0), (ChainConfig::dressing_path(), -62.0, -62.0)]
        {
            let s = output_spectrum(&env, &cfg, 400e3).unwrap();
            assert!((s.line_level(7.0e9) - lo).abs() < 0.5, "{}", s.line_level(7.0e9));
            assert!((s.line_level(7.165e9) - usb).abs() < 0.5, "{}", s.line_level(7.165e9));
        }
    }

    #[test]
    fn insufficient_length() {
        let env = tone(165e6, 1.0, 800e6, 1000);
        assert_eq!(
            output_spectrum(&env, &ChainConfig::pulse_path(), 100e3),
            Err(RfError::InsufficientLength { needed: 8192, available: 1000 })
        );
    }

    #[test]
    fn csv_header() {
        let env = tone(165e6, 1.0, 800e6, 4096);
        let s = output_spectrum(&env, &ChainConfig::pulse_path(), 1e6).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("f_hz,power_dbc\n"));
        assert_eq!(csv.lines().count(), s.bins.len() + 1);
    }
}
