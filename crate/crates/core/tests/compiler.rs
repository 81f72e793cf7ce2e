use mwforge_core::compiler::{compile, Action, CompileError, CompilerConfig, Event, EventSchedule};
use mwforge_core::dds::{synthesize, DdsError, RegisterWords, SysClock};
use mwforge_core::Complex64;
use proptest::prelude::*;

const THREE_GAPS: &str = "\
pulse a { shape=blackman dur=1us freq=165MHz amp=0.8 }
pulse b { shape=linear dur=1us freq=165MHz amp=0.8 }
seq main { a; a; a(freq=166MHz); b(freq=166MHz); }
";

fn cfg() -> CompilerConfig {
    CompilerConfig::default()
}

/// `round(f / 1 GHz * 2^32)` and `round(0.8 * (2^14 - 1))`, worked by hand.
fn words(ftw: u32) -> RegisterWords {
    RegisterWords::new(ftw, 13106, 0).unwrap()
}

#[test]
fn three_gap_golden_schedule() {
    use Action::*;
    let s = compile(THREE_GAPS, &cfg()).unwrap().schedule;
    let pulse = |t0: u64, t1: u64| {
        vec![
            Event::new(t0, RamStart {}),
            Event::new(t0, SwitchOn {}),
            Event::new(t1, SwitchOff {}),
            Event::new(t1, RamStop {}),
        ]
    };
    let mut expected = vec![Event::new(0, SetRegisters(words(708_669_604))), Event::new(0, SelectProfile { index: 0 })];
    expected.extend(pulse(0, 1000));
    expected.extend(pulse(1000, 2000));
    expected.push(Event::new(2000, SetRegisters(words(712_964_571))));
    expected.extend(pulse(2700, 3700));
    expected.push(Event::new(3700, SelectProfile { index: 1 }));
    expected.extend(pulse(4100, 5100));
    assert_eq!(s.events, expected);
    assert_eq!(s.gaps(), vec![0, 700, 400]);
    assert_eq!(s.total_duration_ns, 5100);
    assert_eq!(s.grid_ns, 4);
}

#[test]
fn schedule_json_round_trip() {
    let s = compile(THREE_GAPS, &cfg()).unwrap().schedule;
    let json = s.to_json();
    assert!(json.contains("\"grid_ns\": 4"));
    assert!(json.contains("\"action\": \"set_registers\""));
    assert_eq!(EventSchedule::from_json(&json).unwrap(), s);
}

#[test]
fn ram_capacity_and_profile_overflow() {
    let err = compile("pulse p { shape=blackman step=4ns dur=4100ns freq=10MHz } seq s { p; }", &cfg()).unwrap_err();
    assert!(
        matches!(
            err,
            CompileError::Capacity { source: DdsError::CapacityExceeded { needed: 1025, capacity: 1024 }, .. }
        ),
        "{err:?}"
    );
    let defs: String =
        (0..9).map(|i| format!("pulse p{i} {{ shape=linear dur={}ns freq=10MHz }}\n", 1000 + 4 * i)).collect();
    let seq: String = (0..9).map(|i| format!("p{i}; ")).collect();
    let err = compile(&format!("{defs} seq s {{ {seq} }}"), &cfg()).unwrap_err();
    assert_eq!(err, CompileError::ProfileOverflow { distinct: 9, limit: 8 });
}

/// Baseband phase relative to the carrier at absolute time `t_ns`.
fn demod(s: Complex64, f: f64, t_ns: f64) -> Complex64 {
    s * Complex64::from_polar(1.0, -std::f64::consts::TAU * f * t_ns * 1e-9)
}

#[test]
fn merge_block_equals_back_to_back_pulses() {
    let defs =
        "pulse p { shape=linear dur=1us freq=50MHz amp=0.7 }\npulse q { shape=blackman dur=1us freq=50MHz amp=0.7 }\n";
    let clk = SysClock::default();
    let fs = 1e9;
    let merged =
        synthesize(&compile(&format!("{defs} seq s {{ merge {{ p; q; }} }}"), &cfg()).unwrap().schedule, &clk, fs)
            .unwrap();
    let split_sched = compile(&format!("{defs} seq s {{ p; q; }}"), &cfg()).unwrap().schedule;
    let (p_win, q_win) = {
        let w = split_sched.pulses();
        (w[0], w[1])
    };
    let split = synthesize(&split_sched, &clk, fs).unwrap();
    let f = clk.ftw_to_hz(RegisterWords::new((50e6 / 1e9 * 4294967296.0f64).round() as u32, 0, 0).unwrap().ftw());
    assert_eq!(merged.len(), 2000);
    for k in 0..1000 {
        let a = demod(merged.samples[k], f, k as f64);
        let b = demod(split.samples[p_win.0 as usize + k], f, (p_win.0 as usize + k) as f64);
        assert!((a - b).norm() < 1e-12, "p sample {k}");
        let a = demod(merged.samples[1000 + k], f, (1000 + k) as f64);
        let b = demod(split.samples[q_win.0 as usize + k], f, (q_win.0 as usize + k) as f64);
        assert!((a - b).norm() < 1e-12, "q sample {k}");
    }
}

const SHAPES: [&str; 3] = ["rect", "linear", "blackman"];
const DURS: [u64; 2] = [400, 1000];
const FREQS: [u64; 3] = [10, 20, 40];
const AMPS: [f64; 2] = [0.5, 1.0];

#[derive(Debug, Clone)]
enum Item {
    Pulse { def: usize, freq: usize, amp: usize },
    Wait(u64),
}

fn item() -> impl Strategy<Value = Item> {
    prop_oneof![
        3 => (0..6usize, 0..3usize, 0..2usize).prop_map(|(def, freq, amp)| Item::Pulse { def, freq, amp }),
        1 => (1..400u64).prop_map(|w| Item::Wait(4 * w)),
    ]
}

fn source(items: &[Item]) -> String {
    let mut src = String::new();
    for (i, (shape, dur)) in SHAPES.iter().flat_map(|s| DURS.iter().map(move |d| (s, d))).enumerate() {
        src += &format!("pulse d{i} {{ shape={shape} dur={dur}ns freq=10MHz }}\n");
    }
    src += "seq main {\n";
    for it in items {
        src += &match it {
            Item::Pulse { def, freq, amp } => format!("  d{def}(freq={}MHz, amp={});\n", FREQS[*freq], AMPS[*amp]),
            Item::Wait(ns) => format!("  wait {ns}ns;\n"),
        };
    }
    src + "}\n"
}

/// Pulse windows from first principles: the first pulse starts at 0, each
/// later one after `max(latency floor, pending waits)` rounded up to 4 ns.
fn oracle(items: &[Item]) -> (Vec<(u64, u64)>, u64) {
    let mut out = Vec::new();
    let mut prev: Option<(usize, usize, usize)> = None;
    let (mut cursor, mut wait) = (0u64, 0u64);
    for it in items {
        match *it {
            Item::Wait(ns) => wait += ns,
            Item::Pulse { def, freq, amp } => {
                let gap = match prev {
                    None => wait,
                    Some((pd, pf, pa)) => {
                        let floor = if (pf, pa) != (freq, amp) {
                            700
                        } else if pd != def {
                            400
                        } else {
                            0
                        };
                        floor.max(wait)
                    }
                };
                let start = cursor + gap.div_ceil(4) * 4;
                let stop = start + DURS[def % 2];
                out.push((start, stop));
                cursor = stop;
                wait = 0;
                prev = Some((def, freq, amp));
            }
        }
    }
    (out, cursor + wait)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_programs_respect_grid_and_latency(items in prop::collection::vec(item(), 1..14)) {
        prop_assume!(items.iter().any(|i| matches!(i, Item::Pulse { .. })));
        let s = compile(&source(&items), &cfg()).unwrap().schedule;
        prop_assert!(s.events.iter().all(|e| e.t % 4 == 0));
        prop_assert!(s.events.windows(2).all(|w| w[0].t <= w[1].t));
        prop_assert_eq!(s.total_duration_ns % 4, 0);
        let (windows, total) = oracle(&items);
        prop_assert_eq!(s.pulses(), windows);
        prop_assert_eq!(s.total_duration_ns, total);
        prop_assert!(mwforge_core::compiler::validate_timing(&s).is_empty());
    }
}
