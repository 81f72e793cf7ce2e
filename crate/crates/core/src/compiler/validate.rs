use std::fmt;

use serde::Serialize;

use super::schedule::{Action, EventSchedule};
use crate::dds::RegisterWords;

/// Number of RAM profiles on the channel.
pub const PROFILE_COUNT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    OffGrid,
    OutOfOrder,
    Latency { required_ns: u64, actual_ns: u64 },
    Structure,
    Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Indices into `EventSchedule::events`.
    pub events: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TimingReport {
    pub violations: Vec<Violation>,
}

impl TimingReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, events: Vec<usize>, message: String) {
        self.violations.push(Violation { kind, events, message });
    }
}

impl fmt::Display for TimingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no timing violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "events {:?}: {}", v.events, v.message)?;
        }
        Ok(())
    }
}

struct LastPulse {
    stop_idx: usize,
    t_stop: u64,
    regs: RegisterWords,
    profile: usize,
}

/// Re-derive the minimum dead times from the event stream and check grid
/// alignment, ordering and playback structure.
pub fn validate_timing(schedule: &EventSchedule) -> TimingReport {
    let mut report = TimingReport::default();
    let grid = schedule.grid_ns;
    if grid == 0 {
        report.push(ViolationKind::Structure, vec![], "grid_ns must be positive".into());
        return report;
    }

    let mut regs: Option<RegisterWords> = None;
    let mut profile: Option<usize> = None;
    let mut running: Option<usize> = None;
    let mut switch_on = false;
    let mut last: Option<LastPulse> = None;
    let mut prev_t = 0u64;

    for (i, ev) in schedule.events.iter().enumerate() {
        let t = ev.t;
        if t % grid != 0 {
            report.push(ViolationKind::OffGrid, vec![i], format!("t={t} ns is not a multiple of {grid} ns"));
        }
        if t < prev_t {
            report.push(
                ViolationKind::OutOfOrder,
                vec![i - 1, i],
                format!("t={t} ns precedes the previous event at {prev_t} ns"),
            );
        }
        prev_t = prev_t.max(t);
        if t > schedule.total_duration_ns {
            report.push(
                ViolationKind::Duration,
                vec![i],
                format!("t={t} ns is past the schedule end {} ns", schedule.total_duration_ns),
            );
        }

        match &ev.action {
            Action::SetRegisters(w) => {
                if running.is_some() {
                    report.push(ViolationKind::Structure, vec![i], "register update during RAM playback".into());
                }
                regs = Some(*w);
            }
            Action::SelectProfile { index } => {
                if *index >= PROFILE_COUNT || *index >= schedule.profiles.len() {
                    report.push(
                        ViolationKind::Structure,
                        vec![i],
                        format!("profile {index} does not exist ({} defined)", schedule.profiles.len()),
                    );
                }
                if running.is_some() {
                    report.push(ViolationKind::Structure, vec![i], "profile switch during RAM playback".into());
                }
                profile = Some(*index);
            }
            Action::RamStart {} => {
                if running.is_some() {
                    report.push(ViolationKind::Structure, vec![i], "RAM started twice".into());
                }
                match (regs, profile) {
                    (Some(r), Some(p)) => {
                        if let Some(lp) = &last {
                            let required = schedule.latency.required_gap(r != lp.regs, p != lp.profile, grid);
                            let actual = t.saturating_sub(lp.t_stop);
                            if actual < required {
                                let what = if r != lp.regs { "register change" } else { "profile change" };
                                report.push(
                                    ViolationKind::Latency { required_ns: required, actual_ns: actual },
                                    vec![lp.stop_idx, i],
                                    format!("{actual} ns gap after {what}, needs {required} ns"),
                                );
                            }
                        }
                    }
                    _ => report.push(
                        ViolationKind::Structure,
                        vec![i],
                        "RAM started before registers and profile were programmed".into(),
                    ),
                }
                running = Some(i);
            }
            Action::RamStop {} => {
                if running.take().is_none() {
                    report.push(ViolationKind::Structure, vec![i], "RAM stopped while idle".into());
                }
                if let (Some(r), Some(p)) = (regs, profile) {
                    last = Some(LastPulse { stop_idx: i, t_stop: t, regs: r, profile: p });
                }
            }
            Action::SwitchOn {} => {
                if switch_on {
                    report.push(ViolationKind::Structure, vec![i], "switch already on".into());
                }
                switch_on = true;
            }
            Action::SwitchOff {} => {
                if !switch_on {
                    report.push(ViolationKind::Structure, vec![i], "switch already off".into());
                }
                switch_on = false;
            }
        }
    }
    if let Some(i) = running {
        report.push(ViolationKind::Structure, vec![i], "RAM playback never stopped".into());
    }
    report
}
