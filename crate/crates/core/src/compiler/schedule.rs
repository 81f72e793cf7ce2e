use serde::{Deserialize, Serialize};

use crate::dds::{RamProfile, RegisterWords, GRID_NS};

/// Dead times the channel needs between pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Latencies {
    /// Any FTW/ASF/POW change.
    pub register_ns: u64,
    /// Switching to a different RAM profile with unchanged registers.
    pub profile_ns: u64,
}

impl Default for Latencies {
    fn default() -> Self {
        Self { register_ns: 700, profile_ns: 400 }
    }
}

impl Latencies {
    /// Minimum gap between two pulses, snapped up to the grid.
    pub fn required_gap(&self, registers_changed: bool, profile_changed: bool, grid_ns: u64) -> u64 {
        let raw = if registers_changed {
            self.register_ns
        } else if profile_changed {
            self.profile_ns
        } else {
            0
        };
        snap_up(raw, grid_ns)
    }
}

pub(crate) fn snap_up(t: u64, grid: u64) -> u64 {
    t.div_ceil(grid) * grid
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "args", rename_all = "snake_case")]
pub enum Action {
    SetRegisters(RegisterWords),
    SelectProfile { index: usize },
    RamStart {},
    RamStop {},
    SwitchOn {},
    SwitchOff {},
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    #[serde(flatten)]
    pub action: Action,
}

impl Event {
    pub fn new(t: u64, action: Action) -> Self {
        Self { t, action }
    }
}

/// Timed channel events. Events sharing a timestamp apply in list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSchedule {
    pub grid_ns: u64,
    #[serde(default)]
    pub latency: Latencies,
    pub total_duration_ns: u64,
    #[serde(default)]
    pub profiles: Vec<RamProfile>,
    pub events: Vec<Event>,
}

impl EventSchedule {
    pub fn empty() -> Self {
        Self {
            grid_ns: GRID_NS,
            latency: Latencies::default(),
            total_duration_ns: 0,
            profiles: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// `(start, stop)` times of each RAM playback window.
    pub fn pulses(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut start = None;
        for ev in &self.events {
            match ev.action {
                Action::RamStart {} => start = Some(ev.t),
                Action::RamStop {} => {
                    if let Some(s) = start.take() {
                        out.push((s, ev.t));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Dead time between consecutive pulses.
    pub fn gaps(&self) -> Vec<u64> {
        self.pulses().windows(2).map(|w| w[1].0 - w[0].1).collect()
    }
}
