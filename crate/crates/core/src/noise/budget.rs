use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spectrum::{combine, load_noise_table, NoiseKind, NoiseSpectrum};
use super::NoiseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "ref_100MHz")]
    Ref100MHz,
    #[serde(rename = "lo_7GHz")]
    Lo7GHz,
    #[serde(rename = "dds")]
    Dds,
    #[serde(rename = "output_path")]
    OutputPath,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::Ref100MHz, Source::Lo7GHz, Source::Dds, Source::OutputPath];

    pub fn name(self) -> &'static str {
        match self {
            Source::Ref100MHz => "ref_100MHz",
            Source::Lo7GHz => "lo_7GHz",
            Source::Dds => "dds",
            Source::OutputPath => "output_path",
        }
    }

    /// Shipped table text.
    pub fn builtin_table(self) -> &'static str {
        match self {
            Source::Ref100MHz => include_str!("../../data/ref_100mhz.csv"),
            Source::Lo7GHz => include_str!("../../data/lo_7ghz.csv"),
            Source::Dds => include_str!("../../data/dds.csv"),
            Source::OutputPath => include_str!("../../data/output_path.csv"),
        }
    }

    pub fn builtin(self) -> NoiseSpectrum {
        load_noise_table(self.builtin_table(), NoiseKind::Phase).expect("shipped table is valid")
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Budget configuration: per-source table paths (shipped tables when
/// absent), the integration band and the sources compared for dominance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "default_band")]
    pub band: (f64, f64),
    #[serde(default = "default_contributors")]
    pub contributors: Vec<Source>,
    #[serde(default)]
    pub sources: BTreeMap<Source, String>,
}

fn default_band() -> (f64, f64) {
    (10.0, 1e5)
}

fn default_contributors() -> Vec<Source> {
    vec![Source::Lo7GHz, Source::Dds]
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { band: default_band(), contributors: default_contributors(), sources: BTreeMap::new() }
    }
}

impl BudgetConfig {
    pub fn from_toml(text: &str) -> Result<Self, NoiseError> {
        toml::from_str(text).map_err(|e| NoiseError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    pub sources: BTreeMap<Source, NoiseSpectrum>,
    pub contributors: Vec<Source>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecadeDominance {
    pub f1: f64,
    pub f2: f64,
    pub source: Option<Source>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub band: (f64, f64),
    /// Integrated rms per source, radians.
    pub rms: Vec<(Source, f64)>,
    /// Rms of the power sum of the contributors, radians.
    pub combined_rms: f64,
    pub dominance: Vec<DecadeDominance>,
    /// Lowest offset where the first two contributors cross.
    pub crossover: Option<f64>,
}

impl fmt::Display for BudgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "integrated phase noise, {} Hz to {} Hz", self.band.0, self.band.1)?;
        for (s, r) in &self.rms {
            writeln!(f, "  {:<12} {:>10.1} urad", s.name(), r * 1e6)?;
        }
        writeln!(f, "  {:<12} {:>10.1} urad", "combined", self.combined_rms * 1e6)?;
        writeln!(f, "dominant contributor per decade")?;
        for d in &self.dominance {
            let who = d.source.map_or("-", Source::name);
            writeln!(f, "  {:>10} .. {:<10} {}", d.f1, d.f2, who)?;
        }
        if let Some(c) = self.crossover {
            writeln!(f, "crossover at {c:.1} Hz")?;
        }
        Ok(())
    }
}

impl NoiseBudget {
    /// All four sources from the shipped tables.
    pub fn builtin() -> Self {
        Self { sources: Source::ALL.iter().map(|&s| (s, s.builtin())).collect(), contributors: default_contributors() }
    }

    /// Load tables named in `cfg`, relative paths resolved against `base`.
    pub fn from_config(cfg: &BudgetConfig, base: &Path) -> Result<Self, NoiseError> {
        let mut budget = Self::builtin();
        for (&source, path) in &cfg.sources {
            let p = base.join(path);
            let text = std::fs::read_to_string(&p).map_err(|e| NoiseError::Io(format!("{}: {e}", p.display())))?;
            budget.sources.insert(source, load_noise_table(&text, NoiseKind::Phase)?);
        }
        budget.contributors = cfg.contributors.clone();
        Ok(budget)
    }

    pub fn get(&self, s: Source) -> &NoiseSpectrum {
        &self.sources[&s]
    }

    pub fn report(&self, f1: f64, f2: f64) -> Result<BudgetReport, NoiseError> {
        let rms =
            self.sources.iter().map(|(&s, spec)| Ok((s, spec.integrate_rms(f1, f2)?))).collect::<Result<_, _>>()?;
        let parts: Vec<&NoiseSpectrum> = self.contributors.iter().map(|s| self.get(*s)).collect();
        let combined_rms = if parts.is_empty() { 0.0 } else { combine(&parts)?.integrate_rms(f1, f2)? };
        let crossover = match self.contributors.as_slice() {
            [a, b, ..] => crossover(self.get(*a), self.get(*b), f1, f2),
            _ => None,
        };
        Ok(BudgetReport { band: (f1, f2), rms, combined_rms, dominance: self.dominance(f1, f2)?, crossover })
    }

    /// Contributor with the most integrated power in each decade of the band,
    /// ignoring contributors at their sensitivity floor there.
    pub fn dominance(&self, f1: f64, f2: f64) -> Result<Vec<DecadeDominance>, NoiseError> {
        let mut out = Vec::new();
        if f1 >= f2 {
            return Ok(out);
        }
        let mut lo = f1;
        while lo < f2 {
            let next = 10f64.powf((lo.log10() + 1e-9).floor() + 1.0);
            let hi = next.min(f2);
            let mid = (lo * hi).sqrt();
            let mut best: Option<(Source, f64)> = None;
            for &s in &self.contributors {
                let spec = self.get(s);
                if spec.is_floor_at(mid) {
                    continue;
                }
                let p = spec.integrate_power(lo, hi)?;
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((s, p));
                }
            }
            out.push(DecadeDominance { f1: lo, f2: hi, source: best.map(|b| b.0) });
            lo = hi;
        }
        Ok(out)
    }
}

/// Lowest frequency in `[f1, f2]` where `a` and `b` have equal level.
pub fn crossover(a: &NoiseSpectrum, b: &NoiseSpectrum, f1: f64, f2: f64) -> Option<f64> {
    let lo = f1.max(a.f_min()).max(b.f_min());
    let hi = f2.min(a.f_max()).min(b.f_max());
    if lo >= hi {
        return None;
    }
    let diff = |f: f64| a.level_at(f).unwrap() - b.level_at(f).unwrap();
    let steps = 2000;
    let r = (hi / lo).ln();
    let grid = |i: usize| lo * (r * i as f64 / steps as f64).exp();
    (0..steps).find_map(|i| {
        let (mut x0, mut x1) = (grid(i), grid(i + 1).min(hi));
        let d0 = diff(x0);
        if d0 == 0.0 {
            return Some(x0);
        }
        if d0.signum() == diff(x1).signum() {
            return None;
        }
        for _ in 0..100 {
            let m = (x0 * x1).sqrt();
            if diff(m).signum() == d0.signum() {
                x0 = m;
            } else {
                x1 = m;
            }
        }
        Some((x0 * x1).sqrt())
    })
}
