use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::spectrum::{ssb_to_density, NoiseSpectrum};
use super::NoiseError;
use crate::Complex64;

/// Spectrum assumed above the last breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    #[default]
    Zero,
    /// Continue at the last breakpoint's level up to Nyquist.
    Flat,
}

/// Real noise series (radians for phase, fraction for amplitude) whose
/// one-sided PSD follows `spec`.
///
/// Frequency-domain synthesis on a power-of-two grid: bin `k` gets a complex
/// Gaussian with `E|X_k|^2 = (N^2/2) S(f_k) df`, the Nyquist bin a real one,
/// DC and bins below the first breakpoint nothing. The inverse transform is
/// truncated to `round(duration * sample_rate)` samples.
pub fn synthesize_noise(
    spec: &NoiseSpectrum,
    duration: f64,
    sample_rate: f64,
    seed: u64,
    extension: Extension,
) -> Result<Vec<f64>, NoiseError> {
    if !(duration > 0.0 && sample_rate > 0.0 && duration.is_finite() && sample_rate.is_finite()) {
        return Err(NoiseError::InvalidBand { f1: duration, f2: sample_rate });
    }
    if sample_rate / 2.0 < spec.f_max() {
        return Err(NoiseError::NyquistViolation { nyquist: sample_rate / 2.0, f_max: spec.f_max() });
    }
    let len = (duration * sample_rate).round() as usize;
    let n = len.max(2).next_power_of_two();
    let df = sample_rate / n as f64;
    let last = spec.points().last().map(|p| p.level).unwrap_or(f64::NEG_INFINITY);
    let density = |f: f64| match spec.level_at(f) {
        Some(l) => ssb_to_density(l),
        None if f > spec.f_max() && extension == Extension::Flat => ssb_to_density(last),
        None => 0.0,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut x = vec![Complex64::default(); n];
    let half = n / 2;
    for k in 1..half {
        let a = 0.5 * n as f64 * (density(k as f64 * df) * df).sqrt();
        let z = Complex64::new(gauss(), gauss()) * a;
        x[k] = z;
        x[n - k] = z.conj();
    }
    let a = n as f64 * (density(half as f64 * df) * df).sqrt();
    x[half] = Complex64::new(gauss() * a, 0.0);

    FftPlanner::new().plan_fft_inverse(n).process(&mut x);
    Ok(x[..len].iter().map(|c| c.re / n as f64).collect())
}

/// Uniformly sampled real series with linear interpolation between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSeries {
    pub sample_rate: f64,
    pub values: Vec<f64>,
}

impl NoiseSeries {
    /// Value at `t` seconds; clamps to the end samples outside the record.
    pub fn at(&self, t: f64) -> f64 {
        match self.values.len() {
            0 => 0.0,
            1 => self.values[0],
            len => {
                let x = (t * self.sample_rate).clamp(0.0, (len - 1) as f64);
                let i = (x.floor() as usize).min(len - 2);
                let frac = x - i as f64;
                self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
            }
        }
    }
}
