use serde::{Deserialize, Serialize};

use crate::dds::Shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampProfile {
    Linear,
    /// Rising half of the Blackman window.
    Blackman,
}

/// Envelope shape as written in the source, before sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveShape {
    Rectangular,
    /// Trapezoid; edge defaults to a quarter of the duration.
    Linear {
        edge_ns: Option<u64>,
    },
    Blackman,
    Ramp {
        from: f64,
        to: f64,
        profile: RampProfile,
    },
}

impl WaveShape {
    /// Concrete RAM shape for a pulse of `duration_ns` sampled every `step_ns`.
    pub fn to_shape(&self, duration_ns: u64, step_ns: u64) -> Shape {
        match self {
            WaveShape::Rectangular => Shape::Rectangular,
            WaveShape::Blackman => Shape::Blackman,
            WaveShape::Linear { edge_ns } => Shape::LinearEdges { edge_ns: edge_ns.unwrap_or(duration_ns / 4) },
            WaveShape::Ramp { from, to, profile } => {
                let n = (duration_ns / step_ns).max(1) as usize;
                let samples = (0..n)
                    .map(|i| {
                        let x = if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
                        let g = match profile {
                            RampProfile::Linear => x,
                            RampProfile::Blackman => {
                                crate::dds::Shape::Blackman.window(x / 2.0, duration_ns).unwrap_or(0.0)
                            }
                        };
                        (from + (to - from) * g).clamp(0.0, 1.0)
                    })
                    .collect();
                Shape::Samples(samples)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefinitionKind {
    Pulse,
    Ramp,
}

/// Fully resolved pulse parameters, units normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub shape: WaveShape,
    pub duration_ns: u64,
    pub step_ns: u64,
    pub freq_hz: f64,
    pub amp: f64,
    pub phase_rad: f64,
    /// Offset into the pulse where the phase advances by half a turn.
    pub flip_ns: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseDefinition {
    pub name: String,
    pub kind: DefinitionKind,
    pub params: PulseParams,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseInstance {
    pub name: String,
    pub params: PulseParams,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqItem {
    Pulse(PulseInstance),
    Wait(u64),
    /// Back-to-back pulses played from one polar RAM profile.
    Merge(Vec<PulseInstance>),
}

impl SeqItem {
    pub fn duration_ns(&self) -> u64 {
        match self {
            SeqItem::Pulse(p) => p.params.duration_ns,
            SeqItem::Wait(ns) => *ns,
            SeqItem::Merge(ps) => ps.iter().map(|p| p.params.duration_ns).sum(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SeqItem::Pulse(p) if p.params.flip_ns.is_some() => format!("{}(flip)", p.name),
            SeqItem::Pulse(p) => p.name.clone(),
            SeqItem::Wait(ns) => format!("wait {ns}ns"),
            SeqItem::Merge(ps) => {
                format!("merge{{{}}}", ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(","))
            }
        }
    }
}

/// Checked pulse program: every name resolved, every duration on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub name: String,
    pub definitions: Vec<PulseDefinition>,
    pub sequence: Vec<SeqItem>,
}

impl PulseProgram {
    pub fn invocation_count(&self) -> usize {
        self.sequence
            .iter()
            .map(|i| match i {
                SeqItem::Pulse(_) => 1,
                SeqItem::Wait(_) => 0,
                SeqItem::Merge(ps) => ps.len(),
            })
            .sum()
    }
}
