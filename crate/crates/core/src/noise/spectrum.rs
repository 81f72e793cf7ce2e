use serde::{Deserialize, Serialize};

use super::NoiseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Phase,
    Amplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    /// Offset from the carrier, Hz.
    pub f: f64,
    /// Single-sideband level, dBc/Hz.
    pub level: f64,
    /// At the measurement sensitivity limit; excluded from budget comparisons.
    #[serde(default)]
    pub floor: bool,
}

/// Piecewise power-law noise spectrum: levels interpolate linearly in dB
/// against log frequency between breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectrum")]
pub struct NoiseSpectrum {
    kind: NoiseKind,
    points: Vec<NoisePoint>,
}

#[derive(Deserialize)]
struct RawSpectrum {
    #[serde(default)]
    kind: NoiseKind,
    points: Vec<NoisePoint>,
}

impl TryFrom<RawSpectrum> for NoiseSpectrum {
    type Error = NoiseError;
    fn try_from(r: RawSpectrum) -> Result<Self, NoiseError> {
        NoiseSpectrum::new(r.kind, r.points)
    }
}

/// One-sided density `S = 2 * 10^(L/10)` from a single-sideband level.
pub fn ssb_to_density(level_dbc_hz: f64) -> f64 {
    2.0 * 10f64.powf(level_dbc_hz / 10.0)
}

/// `∫_a^b s_a (f/a)^m df` without cancellation near `m = -1`.
fn power_law_integral(s_a: f64, a: f64, b: f64, m: f64) -> f64 {
    if s_a == 0.0 || b <= a {
        return 0.0;
    }
    let ln = (b / a).ln();
    let x = (m + 1.0) * ln;
    let ratio = if x.abs() < 1e-12 { 1.0 + x / 2.0 } else { x.exp_m1() / x };
    s_a * a * ln * ratio
}

impl NoiseSpectrum {
    pub fn new(kind: NoiseKind, points: Vec<NoisePoint>) -> Result<Self, NoiseError> {
        match points.len() {
            0 => return Err(NoiseError::EmptyTable),
            1 => return Err(NoiseError::TooFewPoints),
            _ => {}
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.f.is_finite() && p.f > 0.0) {
                return Err(NoiseError::MalformedTable(format!("row {}: frequency {} must be positive", i + 1, p.f)));
            }
            if p.level.is_nan() || p.level == f64::INFINITY {
                return Err(NoiseError::MalformedTable(format!("row {}: level {} is not a dB value", i + 1, p.level)));
            }
            if i > 0 && p.f <= points[i - 1].f {
                return Err(NoiseError::NonMonotonicFrequency { row: i + 1, f: p.f });
            }
        }
        Ok(Self { kind, points })
    }

    /// Spectrum from `(f, level)` pairs with no floor flags.
    pub fn from_pairs(kind: NoiseKind, pairs: &[(f64, f64)]) -> Result<Self, NoiseError> {
        Self::new(kind, pairs.iter().map(|&(f, level)| NoisePoint { f, level, floor: false }).collect())
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn points(&self) -> &[NoisePoint] {
        &self.points
    }

    pub fn f_min(&self) -> f64 {
        self.points[0].f
    }

    pub fn f_max(&self) -> f64 {
        self.points[self.points.len() - 1].f
    }

    /// Index of the segment containing `f`; `None` outside the table.
    fn segment(&self, f: f64) -> Option<usize> {
        if !(f >= self.f_min() && f <= self.f_max()) {
            return None;
        }
        let i = self.points.partition_point(|p| p.f <= f);
        Some(i.clamp(1, self.points.len() - 1) - 1)
    }

    fn segment_level(&self, i: usize, f: f64) -> f64 {
        let (p, q) = (&self.points[i], &self.points[i + 1]);
        if p.level == f64::NEG_INFINITY || q.level == f64::NEG_INFINITY {
            return if f == p.f {
                p.level
            } else if f == q.f {
                q.level
            } else {
                f64::NEG_INFINITY
            };
        }
        p.level + (q.level - p.level) * (f / p.f).ln() / (q.f / p.f).ln()
    }

    /// Interpolated level in dBc/Hz, `None` outside the table.
    pub fn level_at(&self, f: f64) -> Option<f64> {
        self.segment(f).map(|i| self.segment_level(i, f))
    }

    /// True if `f` lies in a segment touching a floor-flagged point.
    pub fn is_floor_at(&self, f: f64) -> bool {
        self.segment(f).is_some_and(|i| self.points[i].floor || self.points[i + 1].floor)
    }

    /// `∫ S df` over `[f1, f2]` using the exact power-law integral per segment.
    pub fn integrate_power(&self, f1: f64, f2: f64) -> Result<f64, NoiseError> {
        if !(f1 <= f2) {
            return Err(NoiseError::InvalidBand { f1, f2 });
        }
        if f1 < self.f_min() || f2 > self.f_max() {
            return Err(NoiseError::RangeOutsideTable { f1, f2, lo: self.f_min(), hi: self.f_max() });
        }
        let mut total = 0.0;
        for (i, w) in self.points.windows(2).enumerate() {
            let (a, b) = (w[0].f.max(f1), w[1].f.min(f2));
            if b <= a {
                continue;
            }
            let (la, lb) = (self.segment_level(i, a), self.segment_level(i, b));
            if la == f64::NEG_INFINITY || lb == f64::NEG_INFINITY {
                continue;
            }
            let m = (lb - la) / 10.0 / (b / a).log10();
            total += power_law_integral(ssb_to_density(la), a, b, m);
        }
        Ok(total)
    }

    /// Integrated rms over `[f1, f2]`: radians for phase noise, a fraction for
    /// amplitude noise.
    pub fn integrate_rms(&self, f1: f64, f2: f64) -> Result<f64, NoiseError> {
        Ok(self.integrate_power(f1, f2)?.sqrt())
    }

    /// Spectrum after ideal frequency multiplication by `n`.
    pub fn scale_multiplied(&self, n: f64) -> Result<Self, NoiseError> {
        if !(n >= 1.0 && n.is_finite()) {
            return Err(NoiseError::InvalidFactor(n));
        }
        let db = 20.0 * n.log10();
        let points = self.points.iter().map(|p| NoisePoint { level: p.level + db, ..*p }).collect();
        Ok(Self { kind: self.kind, points })
    }

    /// Sub-spectrum on `[f1, f2]` with interpolated end points.
    pub fn restrict(&self, f1: f64, f2: f64) -> Result<Self, NoiseError> {
        if !(f1 < f2) {
            return Err(NoiseError::InvalidBand { f1, f2 });
        }
        if f1 < self.f_min() || f2 > self.f_max() {
            return Err(NoiseError::RangeOutsideTable { f1, f2, lo: self.f_min(), hi: self.f_max() });
        }
        let mut points = vec![NoisePoint { f: f1, level: self.level_at(f1).unwrap(), floor: self.is_floor_at(f1) }];
        points.extend(self.points.iter().filter(|p| p.f > f1 && p.f < f2).copied());
        points.push(NoisePoint { f: f2, level: self.level_at(f2).unwrap(), floor: self.is_floor_at(f2) });
        Self::new(self.kind, points)
    }

    /// `f_hz,level_dbc_hz,floor` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,level_dbc_hz,floor\n");
        for p in &self.points {
            out += &format!("{},{},{}\n", p.f, p.level, u8::from(p.floor));
        }
        out
    }
}

/// Pointwise power sum on the union of breakpoints over the common range.
pub fn combine(specs: &[&NoiseSpectrum]) -> Result<NoiseSpectrum, NoiseError> {
    let first = specs.first().ok_or(NoiseError::EmptyTable)?;
    if specs.iter().any(|s| s.kind != first.kind) {
        return Err(NoiseError::KindMismatch);
    }
    let lo = specs.iter().map(|s| s.f_min()).fold(f64::NEG_INFINITY, f64::max);
    let hi = specs.iter().map(|s| s.f_max()).fold(f64::INFINITY, f64::min);
    if lo >= hi {
        return Err(NoiseError::DisjointRanges);
    }
    let mut grid: Vec<f64> =
        specs.iter().flat_map(|s| s.points.iter().map(|p| p.f)).filter(|&f| f > lo && f < hi).collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let points = grid
        .into_iter()
        .map(|f| {
            let lin: f64 = specs.iter().map(|s| 10f64.powf(s.level_at(f).unwrap() / 10.0)).sum();
            NoisePoint { f, level: 10.0 * lin.log10(), floor: false }
        })
        .collect();
    NoiseSpectrum::new(first.kind, points)
}

/// Parse a noise table with columns `f_hz,level_dbc_hz[,floor]`. Lines
/// starting with `#` are comments.
pub fn load_noise_table(text: &str, kind: NoiseKind) -> Result<NoiseSpectrum, NoiseError> {
    #[derive(Deserialize)]
    struct Row {
        f_hz: f64,
        level_dbc_hz: f64,
        #[serde(default)]
        floor: Option<String>,
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| NoiseError::MalformedTable(e.to_string()))?;
        let floor = match row.floor.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("") | Some("0") | Some("false") => false,
            Some("1") | Some("true") => true,
            Some(other) => return Err(NoiseError::MalformedTable(format!("row {}: floor flag `{other}`", i + 1))),
        };
        points.push(NoisePoint { f: row.f_hz, level: row.level_dbc_hz, floor });
    }
    NoiseSpectrum::new(kind, points)
}
