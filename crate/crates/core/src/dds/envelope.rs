use std::fmt::Write as _;

use crate::Complex64;

/// Complex baseband samples of the DDS output, `a(t) * exp(i * phi(t))`,
/// with `a` a fraction of full scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope {
    pub sample_rate: f64,
    pub t0_ns: f64,
    pub samples: Vec<Complex64>,
}

impl ComplexEnvelope {
    pub fn zeros(sample_rate: f64, t0_ns: f64, n: usize) -> Self {
        Self { sample_rate, t0_ns, samples: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_ns(&self, k: usize) -> f64 {
        self.t0_ns + k as f64 * 1e9 / self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Multiply every sample by `exp(i * phi[k])`.
    pub fn with_phase_noise(&self, phi: &[f64]) -> Self {
        let samples = self
            .samples
            .iter()
            .zip(phi.iter().chain(std::iter::repeat(&0.0)))
            .map(|(s, &p)| s * Complex64::from_polar(1.0, p))
            .collect();
        Self { samples, ..*self }
    }

    /// `t_ns,re,im` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.samples.len() + 16);
        out.push_str("t_ns,re,im\n");
        for (k, s) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.time_ns(k), s.re, s.im);
        }
        out
    }
}
