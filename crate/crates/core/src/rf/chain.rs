use serde::{Deserialize, Serialize};

use super::filter::{attenuation, Attenuable, FilterConfig};
use super::RfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerKind {
    SingleSideband,
    DoubleBalanced,
}

impl MixerKind {
    /// Post-filter spur suppression (LO leakage, upper sideband) in dBc the
    /// default pre-filter levels are calibrated to.
    pub fn target_levels(self) -> SpurTargets {
        match self {
            MixerKind::SingleSideband => SpurTargets { lo_leak_dbc: -67.0, usb_dbc: -87.0 },
            MixerKind::DoubleBalanced => SpurTargets { lo_leak_dbc: -62.0, usb_dbc: -62.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathName {
    Pulse,
    Dressing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpurTargets {
    pub lo_leak_dbc: f64,
    pub usb_dbc: f64,
}

/// One output path: LO, mixer, bandpass filter, switch and amplifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub path_name: PathName,
    #[serde(default = "default_f_lo")]
    pub f_lo: f64,
    pub mixer_kind: MixerKind,
    /// Pre-filter LO leakage; defaults to the mixer kind's calibrated level.
    #[serde(default)]
    pub lo_leak_dbc: Option<f64>,
    /// Pre-filter upper sideband; defaults to the mixer kind's calibrated level.
    #[serde(default)]
    pub usb_level_dbc: Option<f64>,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default = "default_isolation")]
    pub switch_isolation_db: f64,
    #[serde(default)]
    pub amplifier_gain_db: f64,
    /// Nominal saturated output power; metadata only.
    #[serde(default)]
    pub output_power_w: Option<f64>,
}

fn default_f_lo() -> f64 {
    7e9
}

fn default_isolation() -> f64 {
    40.0
}

impl ChainConfig {
    /// Pulse path: single-sideband mixer, 40 W amplifier.
    pub fn pulse_path() -> Self {
        Self::with_kind(PathName::Pulse, MixerKind::SingleSideband, 40.0)
    }

    /// Dressing path: double-balanced mixer, 10 W amplifier.
    pub fn dressing_path() -> Self {
        Self::with_kind(PathName::Dressing, MixerKind::DoubleBalanced, 10.0)
    }

    fn with_kind(path_name: PathName, mixer_kind: MixerKind, watts: f64) -> Self {
        Self {
            path_name,
            f_lo: default_f_lo(),
            mixer_kind,
            lo_leak_dbc: None,
            usb_level_dbc: None,
            filter: FilterConfig::default(),
            switch_isolation_db: default_isolation(),
            amplifier_gain_db: 0.0,
            output_power_w: Some(watts),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, RfError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RfError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("chain config serializes")
    }

    pub fn validate(&self) -> Result<(), RfError> {
        if !(self.f_lo.is_finite() && self.f_lo > 0.0) {
            return Err(RfError::InvalidConfig(format!("f_lo must be positive, got {}", self.f_lo)));
        }
        for (name, v) in [("lo_leak_dbc", self.lo_leak_dbc), ("usb_level_dbc", self.usb_level_dbc)] {
            if let Some(v) = v {
                if v.is_nan() || v > 0.0 {
                    return Err(RfError::InvalidConfig(format!("{name} must be <= 0 dBc, got {v}")));
                }
            }
        }
        if !(self.switch_isolation_db >= 0.0) {
            return Err(RfError::InvalidConfig("switch_isolation_db must be >= 0".into()));
        }
        self.filter.validate()
    }

    /// DDS frequency that lands on the filter centre.
    pub fn nominal_f_dds(&self) -> f64 {
        self.f_lo - self.filter.f_center
    }

    /// Pre-filter (LO leakage, upper sideband) levels after defaults are applied.
    pub fn spur_levels(&self) -> (f64, f64) {
        let (lo, usb) = calibrate(self.mixer_kind.target_levels(), self.nominal_f_dds(), self);
        (self.lo_leak_dbc.unwrap_or(lo), self.usb_level_dbc.unwrap_or(usb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpurKind {
    Carrier,
    LoLeak,
    UpperSideband,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spur {
    pub kind: SpurKind,
    pub freq: f64,
    pub level_dbc: f64,
}

impl Attenuable for Vec<Spur> {
    fn attenuated(&self, filter: &FilterConfig) -> Self {
        self.iter().map(|s| Spur { level_dbc: s.level_dbc - attenuation(s.freq, filter), ..*s }).collect()
    }
}

/// Mixer products before filtering: the lower sideband carrier at
/// `f_lo - f_dds`, LO leakage at `f_lo` and the upper sideband at `f_lo + f_dds`.
pub fn mix_spurs(f_dds: f64, cfg: &ChainConfig) -> Result<Vec<Spur>, RfError> {
    if !(f_dds > 0.0 && f_dds < cfg.f_lo) {
        return Err(RfError::InvalidConfig(format!("DDS frequency {f_dds} Hz outside (0, f_lo)")));
    }
    let (lo, usb) = cfg.spur_levels();
    Ok(vec![
        Spur { kind: SpurKind::Carrier, freq: cfg.f_lo - f_dds, level_dbc: 0.0 },
        Spur { kind: SpurKind::LoLeak, freq: cfg.f_lo, level_dbc: lo },
        Spur { kind: SpurKind::UpperSideband, freq: cfg.f_lo + f_dds, level_dbc: usb },
    ])
}

/// Pre-filter levels that yield `targets` after the filter of `cfg`.
pub fn calibrate(targets: SpurTargets, f_dds: f64, cfg: &ChainConfig) -> (f64, f64) {
    (
        targets.lo_leak_dbc + attenuation(cfg.f_lo, &cfg.filter),
        targets.usb_dbc + attenuation(cfg.f_lo + f_dds, &cfg.filter),
    )
}
