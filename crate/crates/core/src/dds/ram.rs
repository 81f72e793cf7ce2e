use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::words::{quantize_settings, ASF_FULL_SCALE};
use super::{DdsError, SysClock};

/// Number of 32-bit words in the DDS RAM.
pub const RAM_DEPTH: usize = 1024;
/// Timing grid of the control system in ns.
pub const GRID_NS: u64 = 4;

/// Destination of the RAM words during playback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RamMode {
    Frequency,
    Amplitude,
    Phase,
    /// Phase and amplitude packed into one word.
    Polar,
}

/// Named envelope or explicit sample list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Rectangular,
    /// Trapezoid with linear rise and fall of `edge_ns` each.
    LinearEdges {
        edge_ns: u64,
    },
    /// 0.42 - 0.5 cos(2 pi x) + 0.08 cos(4 pi x), zero at both ends.
    Blackman,
    /// One value per RAM word. Amplitude fraction for amplitude/polar modes,
    /// radians for phase mode, Hz for frequency mode.
    Samples(Vec<f64>),
}

impl Shape {
    /// Window value at normalized position `x` in `[0, 1]`.
    pub fn window(&self, x: f64, duration_ns: u64) -> Option<f64> {
        match self {
            Shape::Rectangular => Some(1.0),
            Shape::Blackman => Some(blackman(x)),
            Shape::LinearEdges { edge_ns } => {
                if *edge_ns == 0 {
                    return Some(1.0);
                }
                let t = x * duration_ns as f64;
                let edge = *edge_ns as f64;
                Some((t / edge).min((duration_ns as f64 - t) / edge).clamp(0.0, 1.0))
            }
            Shape::Samples(_) => None,
        }
    }

    /// `n` samples of the shape, peak-normalized for named windows.
    pub fn sample(&self, n: usize, duration_ns: u64) -> Vec<f64> {
        if let Shape::Samples(v) = self {
            return v.clone();
        }
        let raw: Vec<f64> = (0..n)
            .map(|i| {
                let x = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
                self.window(x, duration_ns).unwrap_or(0.0)
            })
            .collect();
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            raw.into_iter().map(|v| v / peak).collect()
        } else {
            raw
        }
    }
}

pub(crate) fn blackman(x: f64) -> f64 {
    let v = 0.42 - 0.5 * (TAU * x).cos() + 0.08 * (2.0 * TAU * x).cos();
    // clears the ~1e-17 residue at the ends
    v.max(0.0)
}

/// Decoded contents of one RAM word; fields not carried by the mode are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RamSample {
    pub ftw: Option<u32>,
    pub asf: Option<u16>,
    pub pow: Option<u16>,
}

/// Sampled waveform stored in one of the eight RAM profiles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct RamProfile {
    mode: RamMode,
    step_ns: u64,
    words: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    mode: RamMode,
    step_ns: u64,
    words: Vec<u32>,
}

impl TryFrom<RawProfile> for RamProfile {
    type Error = DdsError;
    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        RamProfile::from_words(raw.mode, raw.step_ns, raw.words)
    }
}

impl From<RamProfile> for RawProfile {
    fn from(p: RamProfile) -> Self {
        RawProfile { mode: p.mode, step_ns: p.step_ns, words: p.words }
    }
}

fn check_step(step_ns: u64) -> Result<(), DdsError> {
    if step_ns < GRID_NS || !step_ns.is_multiple_of(GRID_NS) {
        return Err(DdsError::GridViolation {
            grid: GRID_NS,
            detail: format!("step {step_ns} ns must be a positive multiple of {GRID_NS} ns"),
        });
    }
    Ok(())
}

fn check_capacity(n: usize) -> Result<(), DdsError> {
    if n > RAM_DEPTH {
        return Err(DdsError::CapacityExceeded { needed: n, capacity: RAM_DEPTH });
    }
    if n == 0 {
        return Err(DdsError::InvalidShape("profile needs at least one word".into()));
    }
    Ok(())
}

impl RamProfile {
    pub fn from_words(mode: RamMode, step_ns: u64, words: Vec<u32>) -> Result<Self, DdsError> {
        check_step(step_ns)?;
        check_capacity(words.len())?;
        for (i, &w) in words.iter().enumerate() {
            let ok = match mode {
                RamMode::Frequency => w < 1 << 31,
                RamMode::Amplitude => w & 0x3_FFFF == 0,
                RamMode::Phase => w & 0xFFFF == 0,
                RamMode::Polar => w & 0b11 == 0,
            };
            if !ok {
                return Err(DdsError::MalformedTable(format!("word {i} ({w:#010x}) is not a valid {mode:?} word")));
            }
        }
        Ok(Self { mode, step_ns, words })
    }

    /// Polar profile from per-word amplitude fractions and phases in radians.
    pub fn polar(amplitudes: &[f64], phases: &[f64], step_ns: u64) -> Result<Self, DdsError> {
        check_step(step_ns)?;
        if amplitudes.len() != phases.len() {
            return Err(DdsError::InvalidShape(format!("{} amplitudes but {} phases", amplitudes.len(), phases.len())));
        }
        check_capacity(amplitudes.len())?;
        let clk = SysClock::default();
        let words = amplitudes
            .iter()
            .zip(phases)
            .map(|(&a, &p)| {
                let w = quantize_settings(0.0, a, p, &clk)?;
                Ok(encode_polar(w.asf(), w.pow()))
            })
            .collect::<Result<_, DdsError>>()?;
        Ok(Self { mode: RamMode::Polar, step_ns, words })
    }

    pub fn mode(&self) -> RamMode {
        self.mode
    }

    pub fn step_ns(&self) -> u64 {
        self.step_ns
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Playback length in ns.
    pub fn duration_ns(&self) -> u64 {
        self.words.len() as u64 * self.step_ns
    }

    pub fn decode(&self, index: usize) -> RamSample {
        decode_word(self.words[index], self.mode)
    }

    /// `index,word_hex` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,word_hex\n");
        for (i, w) in self.words.iter().enumerate() {
            let _ = writeln!(out, "{i},0x{w:08X}");
        }
        out
    }

    pub fn from_csv(text: &str, mode: RamMode, step_ns: u64) -> Result<Self, DdsError> {
        #[derive(Deserialize)]
        struct Row {
            index: usize,
            word_hex: String,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut words = Vec::new();
        for (line, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| DdsError::MalformedTable(e.to_string()))?;
            if row.index != line {
                return Err(DdsError::MalformedTable(format!("expected index {line}, found {}", row.index)));
            }
            let hex = row.word_hex.trim_start_matches("0x").trim_start_matches("0X");
            let w = u32::from_str_radix(hex, 16).map_err(|e| DdsError::MalformedTable(format!("row {line}: {e}")))?;
            words.push(w);
        }
        Self::from_words(mode, step_ns, words)
    }
}

pub(crate) fn encode_polar(asf: u16, pow: u16) -> u32 {
    ((pow as u32) << 16) | ((asf as u32) << 2)
}

pub(crate) fn decode_word(w: u32, mode: RamMode) -> RamSample {
    match mode {
        RamMode::Frequency => RamSample { ftw: Some(w), ..Default::default() },
        RamMode::Amplitude => RamSample { asf: Some((w >> 18) as u16), ..Default::default() },
        RamMode::Phase => RamSample { pow: Some((w >> 16) as u16), ..Default::default() },
        RamMode::Polar => RamSample {
            asf: Some(((w >> 2) & ASF_FULL_SCALE as u32) as u16),
            pow: Some((w >> 16) as u16),
            ..Default::default()
        },
    }
}

/// Sample `shape` over `duration_ns` at `step_ns` per word and pack it for `mode`.
///
/// Named windows are amplitude shapes and are peak-normalized to ASF full
/// scale. Explicit sample lists are used as given and must have exactly
/// `duration_ns / step_ns` entries.
pub fn build_ram_profile(
    shape: &Shape,
    duration_ns: u64,
    step_ns: u64,
    mode: RamMode,
    clk: &SysClock,
) -> Result<RamProfile, DdsError> {
    check_step(step_ns)?;
    if duration_ns == 0 || !duration_ns.is_multiple_of(step_ns) {
        return Err(DdsError::GridViolation {
            grid: GRID_NS,
            detail: format!("duration {duration_ns} ns is not a positive multiple of step {step_ns} ns"),
        });
    }
    let n = (duration_ns / step_ns) as usize;
    check_capacity(n)?;

    if let Shape::Samples(v) = shape {
        if v.len() != n {
            return Err(DdsError::InvalidShape(format!(
                "{} samples given, {duration_ns} ns / {step_ns} ns needs {n}",
                v.len()
            )));
        }
    } else if matches!(mode, RamMode::Frequency | RamMode::Phase) {
        return Err(DdsError::InvalidShape(format!("named windows are amplitude shapes, not valid in {mode:?} mode")));
    }

    let values = shape.sample(n, duration_ns);
    let words = values
        .iter()
        .map(|&v| {
            let w = match mode {
                RamMode::Frequency => quantize_settings(v, 0.0, 0.0, clk)?.ftw(),
                RamMode::Amplitude => (quantize_settings(0.0, v, 0.0, clk)?.asf() as u32) << 18,
                RamMode::Phase => (quantize_settings(0.0, 0.0, v, clk)?.pow() as u32) << 16,
                RamMode::Polar => encode_polar(quantize_settings(0.0, v, 0.0, clk)?.asf(), 0),
            };
            Ok(w)
        })
        .collect::<Result<Vec<_>, DdsError>>()?;
    Ok(RamProfile { mode, step_ns, words })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn build(shape: Shape, dur: u64, step: u64, mode: RamMode) -> Result<RamProfile, DdsError> {
        build_ram_profile(&shape, dur, step, mode, &SysClock::default())
    }

    #[test]
    fn blackman_endpoints_and_center() {
        assert_eq!(blackman(0.0), 0.0);
        assert_eq!(blackman(1.0), 0.0);
        assert!((blackman(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_counts_match_step() {
        assert_eq!(build(Shape::Blackman, 1000, 4, RamMode::Amplitude).unwrap().len(), 250);
        assert_eq!(build(Shape::Blackman, 2000, 8, RamMode::Amplitude).unwrap().len(), 250);
        assert_eq!(
            build(Shape::Rectangular, 5000, 4, RamMode::Amplitude),
            Err(DdsError::CapacityExceeded { needed: 1250, capacity: 1024 })
        );
        assert_eq!(build(Shape::Rectangular, 4096, 4, RamMode::Amplitude).unwrap().len(), 1024);
    }

    #[test]
    fn invalid_steps_and_durations() {
        for step in [0, 2, 6] {
            assert!(matches!(
                build(Shape::Rectangular, 1200, step, RamMode::Amplitude),
                Err(DdsError::GridViolation { .. })
            ));
        }
        assert!(matches!(build(Shape::Rectangular, 1004, 8, RamMode::Amplitude), Err(DdsError::GridViolation { .. })));
        assert!(matches!(build(Shape::Blackman, 1000, 4, RamMode::Phase), Err(DdsError::InvalidShape(_))));
        assert!(matches!(
            build(Shape::Samples(vec![0.5; 3]), 16, 4, RamMode::Amplitude),
            Err(DdsError::InvalidShape(_))
        ));
    }

    #[test]
    fn blackman_profile_is_peak_normalized_and_symmetric() {
        let p = build(Shape::Blackman, 1000, 4, RamMode::Amplitude).unwrap();
        let asf: Vec<u16> = (0..p.len()).map(|i| p.decode(i).asf.unwrap()).collect();
        assert_eq!(asf[0], 0);
        assert_eq!(*asf.last().unwrap(), 0);
        assert_eq!(*asf.iter().max().unwrap(), ASF_FULL_SCALE);
        for i in 0..asf.len() {
            assert_eq!(asf[i], asf[asf.len() - 1 - i]);
        }
    }

    #[test]
    fn linear_edges_trapezoid() {
        let p = build(Shape::LinearEdges { edge_ns: 100 }, 1000, 4, RamMode::Amplitude).unwrap();
        let first = p.decode(0).asf.unwrap();
        let mid = p.decode(125).asf.unwrap();
        assert_eq!(first, 0);
        assert_eq!(mid, ASF_FULL_SCALE);
    }

    #[test]
    fn word_layouts() {
        let clk = SysClock::default();
        let f = build_ram_profile(&Shape::Samples(vec![165e6]), 4, 4, RamMode::Frequency, &clk).unwrap();
        assert_eq!(f.decode(0).ftw, Some(708_669_604));
        let ph = build_ram_profile(&Shape::Samples(vec![PI]), 4, 4, RamMode::Phase, &clk).unwrap();
        assert_eq!(ph.words()[0], 0x8000_0000);
        assert_eq!(ph.decode(0).pow, Some(32768));
        let pol = RamProfile::polar(&[1.0], &[PI], 4).unwrap();
        assert_eq!(pol.words()[0], 0x8000_FFFC);
        assert_eq!(pol.decode(0), RamSample { ftw: None, asf: Some(16383), pow: Some(32768) });
        let amp = build_ram_profile(&Shape::Samples(vec![1.0]), 4, 4, RamMode::Amplitude, &clk).unwrap();
        assert_eq!(amp.words()[0], 0xFFFC_0000);
    }

    #[test]
    fn csv_and_json_import_export() {
        let p = build(Shape::Blackman, 64, 4, RamMode::Amplitude).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("index,word_hex\n0,0x00000000\n"));
        assert_eq!(RamProfile::from_csv(&csv, RamMode::Amplitude, 4).unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<RamProfile>(&json).unwrap(), p);

        // malformed word for the declared mode
        assert!(RamProfile::from_csv("index,word_hex\n0,0x00000001\n", RamMode::Amplitude, 4).is_err());
        assert!(RamProfile::from_csv("index,word_hex\n1,0x0\n", RamMode::Amplitude, 4).is_err());
        assert!(serde_json::from_str::<RamProfile>(r#"{"mode":"polar","step_ns":6,"words":[0]}"#).is_err());
    }
}
