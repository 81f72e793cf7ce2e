//! Window functions and Welch-averaged periodograms.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Rectangular,
    Hann,
    Blackman,
    /// Kaiser window with shape parameter beta.
    Kaiser(f64),
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut sum, mut term, mut k) = (1.0, 1.0, 1.0);
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

impl Window {
    /// Periodic (DFT-even) coefficients of length `n`.
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        (0..n)
            .map(|i| {
                let x = i as f64 / nf;
                match *self {
                    Window::Rectangular => 1.0,
                    Window::Hann => 0.5 - 0.5 * (TAU * x).cos(),
                    Window::Blackman => (0.42 - 0.5 * (TAU * x).cos() + 0.08 * (2.0 * TAU * x).cos()).max(0.0),
                    Window::Kaiser(beta) => {
                        let r = 2.0 * x - 1.0;
                        bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / bessel_i0(beta)
                    }
                }
            })
            .collect()
    }
}

/// Equivalent noise bandwidth of a window in bins.
pub fn enbw_bins(w: &[f64]) -> f64 {
    let s1: f64 = w.iter().sum();
    let s2: f64 = w.iter().map(|x| x * x).sum();
    w.len() as f64 * s2 / (s1 * s1)
}

/// Signed frequency of FFT bin `k` out of `n`.
pub fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k * sample_rate / n as f64
}

/// Streaming Welch accumulator for complex data.
///
/// Averages `|FFT(w * x_seg)|^2` over segments of length `n` advanced by
/// `hop`. Samples may arrive in blocks of any size.
pub struct Welch {
    n: usize,
    hop: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    pending: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
    acc: Vec<f64>,
    segments: usize,
}

impl Welch {
    /// `overlap` is the fraction of a segment shared with the next, in [0, 1).
    pub fn new(n: usize, window: Window, overlap: f64) -> Self {
        assert!(n > 0 && (0.0..1.0).contains(&overlap));
        let fft = FftPlanner::new().plan_fft_forward(n);
        let hop = (((1.0 - overlap) * n as f64).round() as usize).clamp(1, n);
        Self {
            n,
            hop,
            window: window.coefficients(n),
            scratch: vec![Complex64::default(); fft.get_inplace_scratch_len()],
            fft,
            pending: Vec::with_capacity(2 * n),
            work: vec![Complex64::default(); n],
            acc: vec![0.0; n],
            segments: 0,
        }
    }

    pub fn segment_len(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn push(&mut self, data: &[Complex64]) {
        let mut data = data;
        while !data.is_empty() {
            let take = (self.n - self.pending.len()).min(data.len());
            self.pending.extend_from_slice(&data[..take]);
            data = &data[take..];
            if self.pending.len() == self.n {
                self.process();
                self.pending.drain(..self.hop);
            }
        }
    }

    fn process(&mut self) {
        for ((w, x), &c) in self.work.iter_mut().zip(&self.pending).zip(&self.window) {
            *w = x * c;
        }
        self.fft.process_with_scratch(&mut self.work, &mut self.scratch);
        for (a, x) in self.acc.iter_mut().zip(&self.work) {
            *a += x.norm_sqr();
        }
        self.segments += 1;
    }

    /// Mean `|X_k|^2` per bin in FFT order, or `None` before the first full segment.
    pub fn finish(self) -> Option<Vec<f64>> {
        if self.segments == 0 {
            return None;
        }
        let m = self.segments as f64;
        Some(self.acc.into_iter().map(|a| a / m).collect())
    }
}

/// One-sided power spectral density of a real series, in units²/Hz.
///
/// Hann-windowed segments of length `n` with 50 % overlap. Returns
/// `(frequency, psd)` for bins `0..=n/2`, or `None` if `x` is shorter than `n`.
pub fn psd_one_sided(x: &[f64], sample_rate: f64, n: usize, window: Window) -> Option<(Vec<f64>, Vec<f64>)> {
    if x.len() < n || n < 2 {
        return None;
    }
    let mut welch = Welch::new(n, window, 0.5);
    let norm: f64 = welch.window().iter().map(|w| w * w).sum::<f64>() * sample_rate;
    let block: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    welch.push(&block);
    let p = welch.finish()?;
    let half = n / 2;
    let freqs = (0..=half).map(|k| k as f64 * sample_rate / n as f64).collect();
    let psd = (0..=half)
        .map(|k| {
            let one_sided = if k == 0 || (n.is_multiple_of(2) && k == half) { 1.0 } else { 2.0 };
            one_sided * p[k] / norm
        })
        .collect();
    Some((freqs, psd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i0_known_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-14);
        assert!((bessel_i0(14.0) / 129_418.562_700_648_56 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn enbw_of_standard_windows() {
        let n = 4096;
        assert!((enbw_bins(&Window::Rectangular.coefficients(n)) - 1.0).abs() < 1e-12);
        assert!((enbw_bins(&Window::Hann.coefficients(n)) - 1.5).abs() < 1e-9);
        assert!((enbw_bins(&Window::Blackman.coefficients(n)) - 1.7268).abs() < 1e-3);
    }

    #[test]
    fn bin_frequencies_are_signed() {
        assert_eq!(bin_frequency(0, 8, 8.0), 0.0);
        assert_eq!(bin_frequency(3, 8, 8.0), 3.0);
        assert_eq!(bin_frequency(4, 8, 8.0), -4.0);
        assert_eq!(bin_frequency(7, 8, 8.0), -1.0);
    }

    #[test]
    fn welch_tone_on_bin() {
        let n = 256;
        let fs = 256.0;
        let x: Vec<Complex64> = (0..4096).map(|k| Complex64::from_polar(0.5, TAU * 10.0 * k as f64 / fs)).collect();
        let mut w = Welch::new(n, Window::Kaiser(14.0), 0.5);
        let s1: f64 = w.window().iter().sum();
        for block in x.chunks(100) {
            w.push(block);
        }
        assert_eq!(w.segments(), 31);
        let p = w.finish().unwrap();
        assert!((p[10] / (s1 * s1) - 0.25).abs() < 1e-12);
        assert!(p[128] / p[10] < 1e-14);
    }

    #[test]
    fn psd_of_white_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let fs = 1000.0;
        // uniform on [-0.5, 0.5): variance 1/12, one-sided density 2 var / fs
        let x: Vec<f64> = (0..1 << 16).map(|_| rng.random::<f64>() - 0.5).collect();
        let (f, p) = psd_one_sided(&x, fs, 1024, Window::Hann).unwrap();
        assert_eq!(f.len(), 513);
        let mean = p[1..512].iter().sum::<f64>() / 511.0;
        let expect = 2.0 / 12.0 / fs;
        assert!((mean / expect - 1.0).abs() < 0.02, "{mean} vs {expect}");
        assert!(psd_one_sided(&x[..10], fs, 1024, Window::Hann).is_none());
    }
}
