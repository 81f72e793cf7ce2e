//! Pulse-program compiler: source text to a latency-aware [`EventSchedule`].
//!
//! ```text
//! pulse p { shape=blackman dur=1us freq=165MHz amp=0.8 }
//! seq main { p; p(freq=65MHz); wait 2us; p(flip=500ns); }
//! ```
//!
//! Pipeline: [`parse_program`] -> [`allocate_profiles`] -> [`schedule`].
//! [`validate_timing`] re-checks any schedule, compiler-emitted or not.

mod alloc;
mod ast;
mod lexer;
mod parser;
mod schedule;
mod sema;
mod validate;

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alloc::{allocate_profiles, AllocatedPulse, RamAllocation};
pub use ast::{
    DefinitionKind, PulseDefinition, PulseInstance, PulseParams, PulseProgram, RampProfile, SeqItem, WaveShape,
};
pub use schedule::{Action, Event, EventSchedule, Latencies};
pub use validate::{validate_timing, TimingReport, Violation, ViolationKind, PROFILE_COUNT};

use crate::dds::{DdsError, SysClock, GRID_NS};
use schedule::snap_up;

/// Source position and message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("syntax error\n{}", join(.0))]
    Syntax(Vec<Diagnostic>),
    #[error("semantic error\n{}", join(.0))]
    Semantic(Vec<Diagnostic>),
    #[error("{distinct} distinct waveforms but only {limit} RAM profiles")]
    ProfileOverflow { distinct: usize, limit: usize },
    #[error("`{pulse}`: {source}")]
    Capacity { pulse: String, source: DdsError },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompilerConfig {
    pub clock: SysClock,
    pub latency: Latencies,
}

/// Parse and check a pulse program.
pub fn parse_program(src: &str) -> Result<PulseProgram, CompileError> {
    parse_program_with(src, &CompilerConfig::default())
}

pub fn parse_program_with(src: &str, cfg: &CompilerConfig) -> Result<PulseProgram, CompileError> {
    let raw = parser::parse_raw(src).map_err(|d| CompileError::Syntax(vec![d]))?;
    sema::resolve(&raw, &cfg.clock).map_err(CompileError::Semantic)
}

/// Emit the event schedule, inserting the minimum dead time between pulses.
///
/// The gap before each pulse is `max(latency floor, requested waits)`,
/// snapped up to the grid. Registers and profile for the first pulse are
/// loaded at t = 0; later updates are issued when the previous pulse ends.
pub fn schedule(program: &PulseProgram, alloc: &RamAllocation, cfg: &CompilerConfig) -> EventSchedule {
    let grid = GRID_NS;
    let mut events = Vec::new();
    let mut cursor = 0u64;
    let mut pending_wait = 0u64;
    let mut prev: Option<&AllocatedPulse> = None;
    let mut pulses = alloc.pulses.iter();

    for item in &program.sequence {
        if let SeqItem::Wait(ns) = item {
            pending_wait += ns;
            continue;
        }
        let Some(p) = pulses.next() else { break };
        let start = match prev {
            None => {
                events.push(Event::new(0, Action::SetRegisters(p.registers)));
                events.push(Event::new(0, Action::SelectProfile { index: p.profile }));
                snap_up(pending_wait, grid)
            }
            Some(q) => {
                let regs_changed = q.registers != p.registers;
                let profile_changed = q.profile != p.profile;
                if regs_changed {
                    events.push(Event::new(cursor, Action::SetRegisters(p.registers)));
                }
                if profile_changed {
                    events.push(Event::new(cursor, Action::SelectProfile { index: p.profile }));
                }
                let floor = cfg.latency.required_gap(regs_changed, profile_changed, grid);
                cursor + snap_up(floor.max(pending_wait), grid)
            }
        };
        let end = start + p.duration_ns;
        events.push(Event::new(start, Action::RamStart {}));
        events.push(Event::new(start, Action::SwitchOn {}));
        events.push(Event::new(end, Action::SwitchOff {}));
        events.push(Event::new(end, Action::RamStop {}));
        cursor = end;
        pending_wait = 0;
        prev = Some(p);
    }

    EventSchedule {
        grid_ns: grid,
        latency: cfg.latency,
        total_duration_ns: snap_up(cursor + pending_wait, grid),
        profiles: alloc.profiles.clone(),
        events,
    }
}

/// Output of the whole pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub program: PulseProgram,
    pub allocation: RamAllocation,
    pub schedule: EventSchedule,
}

impl Compiled {
    /// Human-readable pulse table with the dead time before each pulse.
    pub fn timing_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sequence `{}`: {} ns total", self.program.name, self.schedule.total_duration_ns);
        let _ =
            writeln!(out, "{:>4} {:>10} {:>10} {:>8} {:>7}  pulse", "#", "start_ns", "stop_ns", "gap_ns", "profile");
        let windows = self.schedule.pulses();
        for (i, ((start, stop), p)) in windows.iter().zip(&self.allocation.pulses).enumerate() {
            let gap = if i == 0 { "-".to_string() } else { (start - windows[i - 1].1).to_string() };
            let _ = writeln!(out, "{i:>4} {start:>10} {stop:>10} {gap:>8} {:>7}  {}", p.profile, p.label);
        }
        let _ = writeln!(out, "{} RAM profile(s) in use", self.allocation.profiles.len());
        out
    }
}

/// Parse, allocate and schedule in one go.
pub fn compile(src: &str, cfg: &CompilerConfig) -> Result<Compiled, CompileError> {
    let program = parse_program_with(src, cfg)?;
    let allocation = allocate_profiles(&program, cfg)?;
    let schedule = schedule(&program, &allocation, cfg);
    Ok(Compiled { program, allocation, schedule })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaps(src: &str) -> Vec<u64> {
        compile(src, &CompilerConfig::default()).unwrap().schedule.gaps()
    }

    const DEFS: &str = "pulse p { shape=linear dur=1us freq=50MHz }\n\
                        pulse q { shape=blackman dur=1us freq=50MHz }\n";

    #[test]
    fn minimal_program_parses() {
        let p = parse_program("pulse p { shape=blackman dur=1us freq=165MHz amp=0.8 } seq main { p; p; }").unwrap();
        assert_eq!(p.definitions.len(), 1);
        assert_eq!(p.invocation_count(), 2);
        assert_eq!(p.definitions[0].params.duration_ns, 1000);
        assert_eq!(p.definitions[0].params.freq_hz, 165e6);
    }

    #[test]
    fn undefined_name() {
        let Err(CompileError::Semantic(d)) = parse_program("seq main { q; }") else { panic!() };
        assert!(d[0].message.contains("undefined pulse `q`"));
        assert_eq!((d[0].line, d[0].col), (1, 12));
    }

    #[test]
    fn off_grid_duration() {
        let Err(CompileError::Semantic(d)) = parse_program("pulse p { dur=1002ns freq=1MHz } seq main { p; }") else {
            panic!()
        };
        assert!(d[0].message.contains("1002 ns is not a multiple of 4"), "{}", d[0]);
    }

    #[test]
    fn other_semantic_errors() {
        for src in [
            "pulse p { dur=1us freq=1MHz amp=1.2 } seq s { p; }",
            "pulse p { dur=1us freq=600MHz } seq s { p; }",
            "pulse p { dur=1us } seq s { p; }",
            "pulse p { dur=1us freq=1MHz color=red } seq s { p; }",
            "pulse p { dur=1us freq=1us } seq s { p; }",
            "pulse p { dur=1us freq=1MHz step=6ns } seq s { p; }",
            "pulse p { dur=1us freq=1MHz } pulse p { dur=1us freq=1MHz } seq s { p; }",
            "pulse p { dur=1us freq=1MHz } seq s { p(flip=2us); }",
            "pulse p { dur=1us freq=1MHz } seq s { p; wait 3ns; }",
            "pulse p { dur=1us freq=1MHz } seq s { merge { p; p(freq=2MHz); } }",
            "ramp r { dur=1us freq=1MHz to=2 } seq s { r; }",
        ] {
            assert!(matches!(parse_program(src), Err(CompileError::Semantic(_))), "{src}");
        }
    }

    #[test]
    fn units_normalize() {
        let p =
            parse_program("pulse p { dur=0.002ms freq=165000kHz phase=90deg } seq s { p(phase=0.5turn); }").unwrap();
        let d = &p.definitions[0].params;
        assert_eq!(d.duration_ns, 2000);
        assert_eq!(d.freq_hz, 165e6);
        assert!((d.phase_rad - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let SeqItem::Pulse(inst) = &p.sequence[0] else { panic!() };
        assert!((inst.params.phase_rad - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn update_latency_rules() {
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; p; }}")), vec![0]);
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; p(freq=65MHz); }}")), vec![700]);
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; q; }}")), vec![400]);
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; p(amp=0.5); }}")), vec![700]);
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; p(phase=1rad); }}")), vec![700]);
    }

    #[test]
    fn waits_are_a_floor_not_an_addition() {
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; wait 200ns; p(freq=65MHz); }}")), vec![700]);
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; wait 2us; p(freq=65MHz); }}")), vec![2000]);
        assert_eq!(gaps(&format!("{DEFS} seq s {{ p; wait 100ns; wait 100ns; p; }}")), vec![200]);
        let c = compile(&format!("{DEFS} seq s {{ wait 1us; p; wait 500ns; }}"), &CompilerConfig::default()).unwrap();
        assert_eq!(c.schedule.pulses(), vec![(1000, 2000)]);
        assert_eq!(c.schedule.total_duration_ns, 2500);
    }

    #[test]
    fn latencies_are_configurable_and_snapped() {
        let cfg = CompilerConfig { latency: Latencies { register_ns: 701, profile_ns: 10 }, ..Default::default() };
        let c = compile(&format!("{DEFS} seq s {{ p; p(freq=65MHz); q(freq=65MHz); }}"), &cfg).unwrap();
        assert_eq!(c.schedule.gaps(), vec![704, 12]);
        assert!(validate_timing(&c.schedule).is_empty());
    }

    #[test]
    fn three_profiles_in_first_use_order() {
        let src = "pulse a { shape=blackman dur=1us freq=50MHz }\n\
                   pulse b { shape=linear dur=1us freq=50MHz }\n\
                   pulse c { shape=blackman dur=2us step=8ns freq=50MHz }\n\
                   seq s { a; b; c; a; }";
        let c = compile(src, &CompilerConfig::default()).unwrap();
        assert_eq!(c.allocation.assignments(), vec![0, 1, 2, 0]);
        assert_eq!(c.allocation.profiles.len(), 3);
    }

    #[test]
    fn nine_shapes_overflow() {
        let mut src = String::new();
        for i in 0..9 {
            src += &format!("pulse p{i} {{ dur={}ns freq=10MHz }}\n", 4 * (i + 1));
        }
        src += "seq s { ";
        for i in 0..9 {
            src += &format!("p{i}; ");
        }
        src += "}";
        assert_eq!(
            compile(&src, &CompilerConfig::default()).unwrap_err(),
            CompileError::ProfileOverflow { distinct: 9, limit: 8 }
        );
    }

    #[test]
    fn ram_capacity() {
        let err = compile("pulse p { dur=4100ns freq=1MHz } seq s { p; }", &CompilerConfig::default()).unwrap_err();
        assert!(matches!(err, CompileError::Capacity { source: DdsError::CapacityExceeded { needed: 1025, .. }, .. }));
        assert!(compile("pulse p { dur=4096ns freq=1MHz } seq s { p; }", &CompilerConfig::default()).is_ok());
        let err = compile(
            "pulse p { dur=2048ns freq=1MHz } seq s { merge { p; p; p(dur=4ns); } }",
            &CompilerConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CompileError::Capacity { .. }));
    }

    #[test]
    fn phase_flip_compiles_to_one_polar_profile() {
        let c = compile(
            "pulse p { shape=blackman dur=1us freq=165MHz } seq s { p(flip=500ns); }",
            &CompilerConfig::default(),
        )
        .unwrap();
        assert_eq!(c.allocation.profiles.len(), 1);
        let prof = &c.allocation.profiles[0];
        assert_eq!(prof.mode(), crate::dds::RamMode::Polar);
        assert_eq!(prof.len(), 250);
        assert_eq!(prof.decode(124).pow, Some(0));
        assert_eq!(prof.decode(125).pow, Some(32768));
    }

    #[test]
    fn merge_block_has_no_internal_gap() {
        let c = compile(&format!("{DEFS} seq s {{ merge {{ p; q; }} }}"), &CompilerConfig::default()).unwrap();
        assert_eq!(c.schedule.pulses(), vec![(0, 2000)]);
        assert_eq!(c.allocation.profiles[0].len(), 500);
    }

    #[test]
    fn empty_sequence() {
        let c = compile("seq s { }", &CompilerConfig::default()).unwrap();
        assert!(c.schedule.events.is_empty());
        assert_eq!(c.schedule.total_duration_ns, 0);
    }

    #[test]
    fn timing_report_lists_gaps() {
        let c = compile(&format!("{DEFS} seq s {{ p; p(freq=65MHz); }}"), &CompilerConfig::default()).unwrap();
        let r = c.timing_report();
        assert!(r.contains("700"), "{r}");
    }
}
