use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::chain::ChainConfig;
use super::filter::{attenuation, Attenuable, FilterConfig};
use super::RfError;
use crate::dds::ComplexEnvelope;
use crate::spectral::{bin_frequency, enbw_bins, Welch, Window};
use crate::Complex64;

/// Kaiser shape parameter; sidelobes sit well below the −100 dBc floor.
pub const KAISER_BETA: f64 = 14.0;

/// Bins either side of a line counted as belonging to it.
const LINE_HALFWIDTH_BINS: f64 = 8.0;

/// RF output spectrum in dBc, carrier peak at 0 dBc, sorted by frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    /// `(frequency Hz, power dBc)`.
    pub bins: Vec<(f64, f64)>,
    /// Equivalent noise bandwidth of one bin, Hz.
    pub rbw: f64,
    pub bin_width: f64,
    pub enbw_bins: f64,
    /// Absolute power of the peak bin as a fraction of full-scale power.
    pub peak_power: f64,
}

impl SpectrumEstimate {
    pub fn carrier_frequency(&self) -> f64 {
        self.bins.iter().fold((0.0, f64::NEG_INFINITY), |acc, &(f, p)| if p > acc.1 { (f, p) } else { acc }).0
    }

    /// Linear power summed over bins within `halfwidth` of `f`, relative to the peak bin.
    fn band_sum(&self, f: f64, halfwidth: f64) -> f64 {
        let lo = self.bins.partition_point(|&(x, _)| x < f - halfwidth);
        self.bins[lo..].iter().take_while(|&&(x, _)| x <= f + halfwidth).map(|&(_, p)| 10f64.powf(p / 10.0)).sum()
    }

    /// Power of the line nearest `f` relative to the carrier line, dBc.
    /// Window leakage is summed on both, so bin-centring errors cancel.
    pub fn line_level(&self, f: f64) -> f64 {
        let hw = LINE_HALFWIDTH_BINS * self.bin_width;
        10.0 * (self.band_sum(f, hw) / self.band_sum(self.carrier_frequency(), hw)).log10()
    }

    /// Peak bin level within `halfwidth` of `f`, dBc.
    pub fn peak_near(&self, f: f64, halfwidth: f64) -> f64 {
        let lo = self.bins.partition_point(|&(x, _)| x < f - halfwidth);
        self.bins[lo..]
            .iter()
            .take_while(|&&(x, _)| x <= f + halfwidth)
            .map(|&(_, p)| p)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total power as a fraction of full-scale power.
    pub fn total_power(&self) -> f64 {
        self.peak_power * self.bins.iter().map(|&(_, p)| 10f64.powf(p / 10.0)).sum::<f64>() / self.enbw_bins
    }

    /// `f_hz,power_dbc` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(28 * self.bins.len() + 20);
        out.push_str("f_hz,power_dbc\n");
        for &(f, p) in &self.bins {
            let _ = writeln!(out, "{f:.1},{p:.3}");
        }
        out
    }
}

impl Attenuable for SpectrumEstimate {
    fn attenuated(&self, filter: &FilterConfig) -> Self {
        let lin: Vec<f64> = self.bins.iter().map(|&(f, p)| p - attenuation(f, filter)).collect();
        let peak = lin.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            bins: self.bins.iter().zip(&lin).map(|(&(f, _), &p)| (f, p - peak)).collect(),
            peak_power: self.peak_power * 10f64.powf(peak / 10.0),
            ..*self
        }
    }
}

/// Streaming RF spectrum analyzer for one output path.
///
/// Each baseband sample `s` becomes `s + u * conj(s) + l * a_ref` before
/// analysis, where `u` and `l` are the pre-filter upper-sideband and LO
/// leakage amplitudes and `a_ref` the full-power envelope amplitude. The
/// lower sideband maps baseband `f` to RF `f_lo - f`; the conjugate lands on
/// `f_lo + f`.
pub struct SpectrumAnalyzer {
    cfg: ChainConfig,
    sample_rate: f64,
    usb: f64,
    lo: Complex64,
    welch: Welch,
    block: Vec<Complex64>,
}

impl SpectrumAnalyzer {
    pub fn new(cfg: &ChainConfig, sample_rate: f64, rbw: f64, reference_amplitude: f64) -> Result<Self, RfError> {
        cfg.validate()?;
        if !(sample_rate > 0.0 && rbw > 0.0 && rbw.is_finite()) {
            return Err(RfError::InvalidConfig(format!("need sample_rate > 0 and rbw > 0, got {sample_rate}, {rbw}")));
        }
        let n = ((sample_rate / rbw).ceil() as usize).max(2).next_power_of_two();
        let (lo_dbc, usb_dbc) = cfg.spur_levels();
        Ok(Self {
            cfg: cfg.clone(),
            sample_rate,
            usb: 10f64.powf(usb_dbc / 20.0),
            lo: Complex64::new(reference_amplitude * 10f64.powf(lo_dbc / 20.0), 0.0),
            welch: Welch::new(n, Window::Kaiser(KAISER_BETA), 0.5),
            block: Vec::new(),
        })
    }

    pub fn segment_len(&self) -> usize {
        self.welch.segment_len()
    }

    pub fn push(&mut self, samples: &[Complex64]) {
        self.block.clear();
        self.block.extend(samples.iter().map(|s| s + s.conj() * self.usb + self.lo));
        self.welch.push(&self.block);
    }

    pub fn finish(self, available: usize) -> Result<SpectrumEstimate, RfError> {
        let n = self.welch.segment_len();
        let w = self.welch.window();
        let s1: f64 = w.iter().sum();
        let enbw = enbw_bins(w);
        let p = self.welch.finish().ok_or(RfError::InsufficientLength { needed: n, available })?;
        let bin_width = self.sample_rate / n as f64;
        let mut bins: Vec<(f64, f64)> = p
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = self.cfg.f_lo - bin_frequency(k, n, self.sample_rate);
                (f, 10.0 * (x / (s1 * s1)).log10())
            })
            .collect();
        bins.sort_by(|a, b| a.0.total_cmp(&b.0));
        // unfiltered estimate with absolute dB, then filter and renormalize
        let raw = SpectrumEstimate { bins, rbw: enbw * bin_width, bin_width, enbw_bins: enbw, peak_power: 1.0 };
        Ok(raw.attenuated(&self.cfg.filter))
    }
}

/// Welch spectrum of a materialized envelope through the chain of `cfg`.
pub fn output_spectrum(envelope: &ComplexEnvelope, cfg: &ChainConfig, rbw: f64) -> Result<SpectrumEstimate, RfError> {
    let mut a = SpectrumAnalyzer::new(cfg, envelope.sample_rate, rbw, envelope.peak_amplitude())?;
    if a.segment_len() > envelope.len() {
        return Err(RfError::InsufficientLength { needed: a.segment_len(), available: envelope.len() });
    }
    a.push(&envelope.samples);
    a.finish(envelope.len())
}
