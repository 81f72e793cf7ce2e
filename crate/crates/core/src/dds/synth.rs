use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::ram::RamMode;
use super::words::{asf_to_fraction, pow_to_turns};
use super::{ComplexEnvelope, DdsError, RegisterWords, SysClock};
use crate::compiler::{validate_timing, Action, EventSchedule};
use crate::Complex64;

const TWO_POW_32: f64 = 4294967296.0;

/// How the phase accumulator behaves across frequency changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Phase is `2 pi f t + pow` with `t` measured from the schedule origin,
    /// so re-issuing the same words reproduces the same absolute phase.
    #[default]
    Coherent,
    /// The accumulator keeps running across frequency changes.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub phase_mode: PhaseMode,
    /// Linear switch edge duration; `None` models an ideal switch.
    pub switch_edge_ns: Option<f64>,
    /// Carrier leaking through the open switch, dB relative to the on state.
    pub leakage_db: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { phase_mode: PhaseMode::Coherent, switch_edge_ns: None, leakage_db: f64::NEG_INFINITY }
    }
}

/// Channel state after all events at `t_ns` have been applied.
#[derive(Debug, Clone, Copy)]
struct Interval {
    t_ns: f64,
    regs: RegisterWords,
    profile: Option<usize>,
    ram_start: Option<f64>,
    switch_on: bool,
    switch_t: f64,
}

fn timeline(schedule: &EventSchedule) -> Vec<Interval> {
    let mut cur = Interval {
        t_ns: 0.0,
        regs: RegisterWords::ZERO,
        profile: None,
        ram_start: None,
        switch_on: false,
        switch_t: f64::NEG_INFINITY,
    };
    let mut out = vec![cur];
    for ev in &schedule.events {
        let t = ev.t as f64;
        match &ev.action {
            Action::SetRegisters(w) => cur.regs = *w,
            Action::SelectProfile { index } => cur.profile = Some(*index),
            Action::RamStart {} => cur.ram_start = Some(t),
            Action::RamStop {} => cur.ram_start = None,
            Action::SwitchOn {} => {
                cur.switch_on = true;
                cur.switch_t = t;
            }
            Action::SwitchOff {} => {
                cur.switch_on = false;
                cur.switch_t = t;
            }
        }
        cur.t_ns = t;
        match out.last_mut() {
            Some(last) if last.t_ns == t => *last = cur,
            _ => out.push(cur),
        }
    }
    out
}

/// Exact `frac(ftw * cycles / 2^32)` for the accumulator after `t_ns`.
fn coherent_turns(ftw: u32, t_ns: f64, f_sys: f64) -> f64 {
    let cycles = t_ns * f_sys * 1e-9;
    let whole = cycles.floor();
    let frac = cycles - whole;
    let acc = (ftw as u128 * whole as u128) & 0xFFFF_FFFF;
    (acc as f64 / TWO_POW_32 + ftw as f64 * frac / TWO_POW_32).fract()
}

/// Amplitude, FTW, phase offset (turns) and the time the current FTW took effect.
fn channel_output(iv: &Interval, schedule: &EventSchedule, t: f64) -> (f64, u32, f64, f64) {
    let mut amp = asf_to_fraction(iv.regs.asf());
    let mut ftw = iv.regs.ftw();
    let mut pow = pow_to_turns(iv.regs.pow());
    let mut since = iv.t_ns;
    if let (Some(t_rs), Some(p)) = (iv.ram_start, iv.profile.and_then(|i| schedule.profiles.get(i))) {
        let step = p.step_ns() as f64;
        let idx = (((t - t_rs) / step).floor().max(0.0) as usize).min(p.len() - 1);
        let s = p.decode(idx);
        match p.mode() {
            RamMode::Amplitude => amp *= asf_to_fraction(s.asf.unwrap_or(0)),
            RamMode::Polar => {
                amp *= asf_to_fraction(s.asf.unwrap_or(0));
                pow += pow_to_turns(s.pow.unwrap_or(0));
            }
            RamMode::Phase => pow += pow_to_turns(s.pow.unwrap_or(0)),
            RamMode::Frequency => {
                ftw = s.ftw.unwrap_or(0);
                since = since.max(t_rs + idx as f64 * step);
            }
        }
    }
    (amp, ftw, pow, since)
}

fn switch_gate(iv: &Interval, t: f64, cfg: &SynthConfig, leak: f64) -> f64 {
    let g = match cfg.switch_edge_ns {
        Some(edge) if edge > 0.0 => {
            let x = ((t - iv.switch_t) / edge).clamp(0.0, 1.0);
            if iv.switch_on {
                x
            } else {
                1.0 - x
            }
        }
        _ => {
            if iv.switch_on {
                1.0
            } else {
                0.0
            }
        }
    };
    leak + (1.0 - leak) * g
}

fn max_programmed_frequency(schedule: &EventSchedule, clk: &SysClock) -> f64 {
    let mut max_ftw = 0u32;
    for ev in &schedule.events {
        match &ev.action {
            Action::SetRegisters(w) => max_ftw = max_ftw.max(w.ftw()),
            Action::SelectProfile { index } => {
                if let Some(p) = schedule.profiles.get(*index) {
                    if p.mode() == RamMode::Frequency {
                        max_ftw = max_ftw.max(p.words().iter().copied().max().unwrap_or(0));
                    }
                }
            }
            _ => {}
        }
    }
    clk.ftw_to_hz(max_ftw)
}

/// Synthesize the complex baseband output of a schedule with the default
/// (phase-coherent, ideal switch) configuration.
pub fn synthesize(schedule: &EventSchedule, clk: &SysClock, sample_rate: f64) -> Result<ComplexEnvelope, DdsError> {
    synthesize_with(schedule, clk, sample_rate, &SynthConfig::default())
}

pub fn synthesize_with(
    schedule: &EventSchedule,
    clk: &SysClock,
    sample_rate: f64,
    cfg: &SynthConfig,
) -> Result<ComplexEnvelope, DdsError> {
    let mut samples = Vec::new();
    synthesize_chunked(schedule, clk, sample_rate, cfg, 1 << 16, |chunk| samples.extend_from_slice(chunk))?;
    Ok(ComplexEnvelope { sample_rate, t0_ns: 0.0, samples })
}

/// Streaming form of [`synthesize_with`]: hands consecutive blocks of at most
/// `chunk_len` samples to `sink` instead of materializing the whole envelope.
/// Returns the total sample count.
pub fn synthesize_chunked(
    schedule: &EventSchedule,
    clk: &SysClock,
    sample_rate: f64,
    cfg: &SynthConfig,
    chunk_len: usize,
    mut sink: impl FnMut(&[Complex64]),
) -> Result<usize, DdsError> {
    let report = validate_timing(schedule);
    if !report.is_empty() {
        return Err(DdsError::UnvalidatedSchedule(report.to_string()));
    }
    let max_freq = max_programmed_frequency(schedule, clk);
    if !(sample_rate.is_finite() && sample_rate > 0.0 && sample_rate >= 4.0 * max_freq) {
        return Err(DdsError::SampleRateTooLow { rate: sample_rate, max_freq });
    }

    let n = (schedule.total_duration_ns as f64 * 1e-9 * sample_rate).round() as usize;
    let tl = timeline(schedule);
    let f_sys = clk.f_sys();
    let hz_per_lsb = f_sys / TWO_POW_32;
    let leak = 10f64.powf(cfg.leakage_db / 20.0);

    let mut seg = 0usize;
    // continuous mode: accumulator turns at `acc_t` with `acc_ftw` running
    let (mut acc, mut acc_t, mut acc_ftw) = (0.0f64, 0.0f64, 0u32);
    let mut buf = vec![Complex64::new(0.0, 0.0); chunk_len.max(1).min(n.max(1))];

    let mut k = 0usize;
    while k < n {
        let len = buf.len().min(n - k);
        for (j, out) in buf[..len].iter_mut().enumerate() {
            let t = (k + j) as f64 * 1e9 / sample_rate;
            while seg + 1 < tl.len() && tl[seg + 1].t_ns <= t {
                seg += 1;
            }
            let iv = &tl[seg];
            let gate = switch_gate(iv, t, cfg, leak);
            if gate == 0.0 {
                *out = Complex64::new(0.0, 0.0);
                if cfg.phase_mode == PhaseMode::Coherent {
                    continue;
                }
            }
            let (amp, ftw, pow, since) = channel_output(iv, schedule, t);
            let carrier = match cfg.phase_mode {
                PhaseMode::Coherent => coherent_turns(ftw, t, f_sys),
                PhaseMode::Continuous => {
                    if ftw != acc_ftw {
                        let t_c = since.max(acc_t);
                        acc = (acc + acc_ftw as f64 * hz_per_lsb * (t_c - acc_t) * 1e-9).fract();
                        acc_t = t_c;
                        acc_ftw = ftw;
                    }
                    (acc + ftw as f64 * hz_per_lsb * (t - acc_t) * 1e-9).fract()
                }
            };
            *out = if gate > 0.0 && amp > 0.0 {
                Complex64::from_polar(gate * amp, TAU * (carrier + pow))
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        sink(&buf[..len]);
        k += len;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_turns_matches_naive_for_small_times() {
        let ftw = 708_669_604u32;
        for t in [0.0, 1.0, 3.7, 100.25, 999.0] {
            let naive = (ftw as f64 / TWO_POW_32 * t).fract();
            assert!((coherent_turns(ftw, t, 1e9) - naive).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn coherent_turns_exact_at_integer_cycles() {
        // 2^31 - 1 LSB over 2^20 cycles: integer arithmetic keeps it exact
        let ftw = (1u32 << 31) - 1;
        let t = (1u64 << 20) as f64;
        let expect = ((ftw as u128 * (1u128 << 20)) & 0xFFFF_FFFF) as f64 / TWO_POW_32;
        assert_eq!(coherent_turns(ftw, t, 1e9), expect);
    }
}
