use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ast::{PulseInstance, PulseProgram, SeqItem};
use super::validate::PROFILE_COUNT;
use super::{CompileError, CompilerConfig};
use crate::dds::{build_ram_profile, quantize_settings, RamMode, RamProfile, RegisterWords, SysClock};

/// RAM words and register settings of one sequence entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocatedPulse {
    pub label: String,
    pub profile: usize,
    pub registers: RegisterWords,
    pub duration_ns: u64,
}

/// Distinct waveforms mapped onto the eight RAM profiles in first-use order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamAllocation {
    pub profiles: Vec<RamProfile>,
    /// One entry per pulse or merge block, in sequence order.
    pub pulses: Vec<AllocatedPulse>,
}

impl RamAllocation {
    /// Profile index assigned to each sequence entry.
    pub fn assignments(&self) -> Vec<usize> {
        self.pulses.iter().map(|p| p.profile).collect()
    }
}

fn capacity(label: &str, e: crate::dds::DdsError) -> CompileError {
    CompileError::Capacity { pulse: label.to_string(), source: e }
}

fn single(p: &PulseInstance, clk: &SysClock) -> Result<(RamProfile, RegisterWords), CompileError> {
    let params = &p.params;
    let shape = params.shape.to_shape(params.duration_ns, params.step_ns);
    let profile = build_ram_profile(&shape, params.duration_ns, params.step_ns, RamMode::Amplitude, clk)
        .map_err(|e| capacity(&p.name, e))?;
    let regs =
        quantize_settings(params.freq_hz, params.amp, params.phase_rad, clk).map_err(|e| capacity(&p.name, e))?;
    Ok((profile, regs))
}

/// Concatenate pulses into one polar profile. Registers carry the common
/// frequency, the largest amplitude and the first pulse's phase; RAM words
/// carry the rest relative to those.
fn merged(pulses: &[PulseInstance], label: &str, clk: &SysClock) -> Result<(RamProfile, RegisterWords), CompileError> {
    let first = &pulses[0].params;
    let amp_ref = pulses.iter().map(|p| p.params.amp).fold(0.0, f64::max);
    let step = first.step_ns;
    let (mut amps, mut phases) = (Vec::new(), Vec::new());
    for p in pulses {
        let params = &p.params;
        let n = (params.duration_ns / step) as usize;
        let scale = if amp_ref > 0.0 { params.amp / amp_ref } else { 0.0 };
        let flip_at = params.flip_ns.map(|f| (f / step) as usize).unwrap_or(usize::MAX);
        let values = params.shape.to_shape(params.duration_ns, step).sample(n, params.duration_ns);
        for (i, v) in values.into_iter().enumerate() {
            amps.push((v * scale).clamp(0.0, 1.0));
            let flip = if i >= flip_at { PI } else { 0.0 };
            phases.push(params.phase_rad - first.phase_rad + flip);
        }
    }
    let profile = RamProfile::polar(&amps, &phases, step).map_err(|e| capacity(label, e))?;
    let regs = quantize_settings(first.freq_hz, amp_ref, first.phase_rad, clk).map_err(|e| capacity(label, e))?;
    Ok((profile, regs))
}

/// Assign every distinct waveform a RAM profile in first-use order.
pub fn allocate_profiles(program: &PulseProgram, cfg: &CompilerConfig) -> Result<RamAllocation, CompileError> {
    let clk = &cfg.clock;
    let mut profiles: Vec<RamProfile> = Vec::new();
    let mut pulses = Vec::new();
    for item in &program.sequence {
        let label = item.label();
        let (profile, registers) = match item {
            SeqItem::Wait(_) => continue,
            SeqItem::Pulse(p) if p.params.flip_ns.is_none() => single(p, clk)?,
            SeqItem::Pulse(p) => merged(std::slice::from_ref(p), &label, clk)?,
            SeqItem::Merge(ps) => merged(ps, &label, clk)?,
        };
        let duration_ns = profile.duration_ns();
        let index = match profiles.iter().position(|q| *q == profile) {
            Some(i) => i,
            None => {
                profiles.push(profile);
                profiles.len() - 1
            }
        };
        pulses.push(AllocatedPulse { label, profile: index, registers, duration_ns });
    }
    if profiles.len() > PROFILE_COUNT {
        return Err(CompileError::ProfileOverflow { distinct: profiles.len(), limit: PROFILE_COUNT });
    }
    Ok(RamAllocation { profiles, pulses })
}
