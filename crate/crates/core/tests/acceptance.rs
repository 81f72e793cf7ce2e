//! Acceptance suite. Prints one PASS/FAIL line per criterion with the
//! measured values and runtime; exits nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mwforge_core::atom::{evolve, excitation_profile, BlochState, DriveField, Envelope};
use mwforge_core::compiler::{compile, Action, CompileError, CompilerConfig, EventSchedule};
use mwforge_core::dds::{
    amplitude_resolution, dequantize, frequency_resolution, phase_resolution, synthesize, synthesize_chunked, DdsError,
    SynthConfig, SysClock,
};
use mwforge_core::noise::{synthesize_noise, Extension, NoiseKind, NoiseSpectrum, Source};
use mwforge_core::rf::{apply_filter, mix_spurs, ChainConfig, SpectrumAnalyzer, SpurKind};
use mwforge_core::spectral::{psd_one_sided, Window};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Round `x` to a multiple of `unit`.
fn displayed(x: f64, unit: f64) -> f64 {
    (x / unit).round() * unit
}

fn table_resolutions() -> Outcome {
    let clk = SysClock::new(1e9).unwrap();
    let f_mhz = displayed(frequency_resolution(&clk) * 1e3, 10.0);
    let a_pct = displayed(amplitude_resolution() * 100.0, 0.001);
    let p_urad = displayed(phase_resolution() * 1e6, 1.0);
    let pass = f_mhz == 230.0 && (a_pct - 0.006).abs() < 1e-12 && p_urad == 96.0;
    outcome(pass, format!("{f_mhz} mHz, {a_pct:.3} %, {p_urad} urad"))
}

const CW_200US: &str = "pulse cw { shape=box step=200ns dur=200us freq=165MHz amp=1.0 } seq main { cw; }";

fn first_settings(s: &EventSchedule, clk: &SysClock) -> (f64, f64) {
    s.events
        .iter()
        .find_map(|e| match &e.action {
            Action::SetRegisters(w) => {
                let st = dequantize(w, clk);
                Some((st.frequency, st.amplitude))
            }
            _ => None,
        })
        .expect("schedule loads registers")
}

fn spur_budget() -> Outcome {
    let ccfg = CompilerConfig::default();
    let sched = compile(CW_200US, &ccfg).unwrap().schedule;
    let (f_dds, amp) = first_settings(&sched, &ccfg.clock);
    let fs = 800e6;
    let mut pass = true;
    let mut detail = Vec::new();
    for (cfg, lo_t, usb_t) in [(ChainConfig::pulse_path(), -67.0, -87.0), (ChainConfig::dressing_path(), -62.0, -62.0)]
    {
        let spurs = apply_filter(&mix_spurs(f_dds, &cfg).unwrap(), &cfg.filter);
        let level = |k: SpurKind| spurs.iter().find(|s| s.kind == k).unwrap().level_dbc;
        let carrier = level(SpurKind::Carrier);
        let (lo_a, usb_a) = (level(SpurKind::LoLeak) - carrier, level(SpurKind::UpperSideband) - carrier);

        let mut an = SpectrumAnalyzer::new(&cfg, fs, 20e3, amp).unwrap();
        let n = synthesize_chunked(&sched, &ccfg.clock, fs, &SynthConfig::default(), 1 << 16, |c| an.push(c)).unwrap();
        let est = an.finish(n).unwrap();
        let (lo_f, usb_f) = (est.line_level(cfg.f_lo), est.line_level(cfg.f_lo + f_dds));

        pass &= (lo_a - lo_t).abs() <= 0.1 && (usb_a - usb_t).abs() <= 0.1;
        pass &= (lo_f - lo_t).abs() <= 3.0 && (usb_f - usb_t).abs() <= 3.0;
        detail.push(format!("{:?}: analytic {lo_a:.2}/{usb_a:.2} dBc, fft {lo_f:.2}/{usb_f:.2} dBc", cfg.path_name));
    }
    outcome(pass, detail.join("; "))
}

fn noise_integration() -> Outcome {
    let flat = NoiseSpectrum::from_pairs(NoiseKind::Phase, &[(1.0, -120.0), (1e6, -120.0)]).unwrap();
    let rms = flat.integrate_rms(10.0, 1e5).unwrap();
    let closed = (2.0 * 1e-12 * (1e5 - 10.0f64)).sqrt();
    let a = (rms / closed - 1.0).abs() < 1e-4 && (rms * 1e6 - 447.2).abs() < 0.05;

    let lvl = flat.scale_multiplied(70.0).unwrap().level_at(1e3).unwrap() - flat.level_at(1e3).unwrap();
    let b = (lvl - 36.90).abs() <= 0.01;

    let out = Source::OutputPath.builtin().integrate_rms(10.0, 1e5).unwrap() * 1e6;
    let c = (out / 580.0 - 1.0).abs() <= 0.15;
    outcome(a && b && c, format!("(a) {:.2} urad, (b) +{lvl:.3} dB, (c) {out:.1} urad vs 580", rms * 1e6))
}

/// Worst `|Welch / target|` in dB at the decade midpoints 10^1.5 .. 10^4.5 Hz.
fn round_trip_error(spec: &NoiseSpectrum) -> f64 {
    let (fs, n, seeds) = (1e6, 1 << 18, 20u64);
    let mut avg: Vec<f64> = Vec::new();
    let mut freqs = Vec::new();
    for seed in 0..seeds {
        let x = synthesize_noise(spec, 1.0, fs, seed, Extension::Zero).unwrap();
        let (f, p) = psd_one_sided(&x, fs, n, Window::Hann).unwrap();
        if avg.is_empty() {
            avg = vec![0.0; p.len()];
            freqs = f;
        }
        avg.iter_mut().zip(&p).for_each(|(a, v)| *a += v / seeds as f64);
    }
    [1.5f64, 2.5, 3.5, 4.5]
        .iter()
        .map(|e| {
            let mid = 10f64.powf(*e);
            let (mut got, mut want) = (0.0, 0.0);
            for (f, p) in freqs.iter().zip(&avg).filter(|(f, _)| (**f / mid).ln().abs() < 0.12) {
                got += p;
                want += 2.0 * 10f64.powf(spec.level_at(*f).unwrap() / 10.0);
            }
            db(got / want).abs()
        })
        .fold(0.0, f64::max)
}

fn noise_round_trip() -> Outcome {
    let flat = NoiseSpectrum::from_pairs(NoiseKind::Phase, &[(1.0, -110.0), (5e5, -110.0)]).unwrap();
    let table = Source::OutputPath.builtin().restrict(1.0, 5e5).unwrap();
    let (e1, e2) = (round_trip_error(&flat), round_trip_error(&table));
    outcome(e1 <= 3.0 && e2 <= 3.0, format!("worst deviation flat {e1:.2} dB, output path {e2:.2} dB"))
}

fn compiler_golden() -> Outcome {
    let cfg = CompilerConfig::default();
    let src = "pulse a { shape=blackman dur=1us freq=165MHz amp=0.8 }\n\
               pulse b { shape=linear dur=1us freq=165MHz amp=0.8 }\n\
               seq main { a; a; a(freq=166MHz); b(freq=166MHz); }";
    let gaps = compile(src, &cfg).unwrap().schedule.gaps();
    let cap = compile("pulse p { shape=blackman step=4ns dur=4100ns freq=10MHz } seq s { p; }", &cfg);
    let cap_ok =
        matches!(cap, Err(CompileError::Capacity { source: DdsError::CapacityExceeded { needed: 1025, .. }, .. }));
    let defs: String =
        (0..9).map(|i| format!("pulse p{i} {{ shape=linear dur={}ns freq=10MHz }}\n", 1000 + 4 * i)).collect();
    let seq: String = (0..9).map(|i| format!("p{i}; ")).collect();
    let ovf = compile(&format!("{defs} seq s {{ {seq} }}"), &cfg);
    let ovf_ok = matches!(ovf, Err(CompileError::ProfileOverflow { distinct: 9, limit: 8 }));

    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut off_grid = 0;
    for _ in 0..1000 {
        let mut src = String::from(
            "pulse r { shape=rect dur=400ns freq=10MHz }\npulse k { shape=blackman dur=1us freq=10MHz }\nseq s {",
        );
        for _ in 0..rng.random_range(1..12) {
            match rng.random_range(0..4) {
                0 => src += &format!(" wait {}ns;", 4 * rng.random_range(1..500)),
                1 => src += &format!(" k(freq={}MHz);", rng.random_range(1..50)),
                _ => src += &format!(" r(amp={:.2});", rng.random_range(0.1..1.0)),
            }
        }
        src += " r; }";
        let s = compile(&src, &cfg).unwrap().schedule;
        off_grid +=
            s.events.iter().filter(|e| e.t % 4 != 0).count() + usize::from(!s.total_duration_ns.is_multiple_of(4));
    }
    let pass = gaps == [0, 700, 400] && cap_ok && ovf_ok && off_grid == 0;
    outcome(pass, format!("gaps {gaps:?}, 1025-word capacity error {cap_ok}, 9-shape overflow {ovf_ok}, off-grid events {off_grid}/1000 programs"))
}

/// Closed-form excited population for a constant drive from the ground state.
fn rabi_closed(rabi: f64, det: f64, t: f64) -> f64 {
    let g = rabi.hypot(det);
    (rabi / g).powi(2) * (g * t / 2.0).sin().powi(2)
}

fn bloch_oracle() -> Outcome {
    let rabi = TAU * 1e6;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let det = -2.0 * rabi + 4.0 * rabi * i as f64 / 19.0;
        let d = DriveField::constant(rabi, 0.0, det);
        let traj = evolve(BlochState::GROUND, &d, 3e-6, d.max_step() / 4.0).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            worst = worst.max((s.excited_population() - rabi_closed(rabi, det, *t)).abs());
        }
    }

    let d = DriveField::constant(rabi, 0.0, 0.7 * rabi);
    let h = d.max_step();
    let err = |dt: f64| {
        let t = 100.0 * h;
        (evolve(BlochState::GROUND, &d, t, dt).unwrap().last().excited_population() - rabi_closed(rabi, 0.7 * rabi, t))
            .abs()
    };
    let ratio = err(h) / err(h / 2.0);

    let ccfg = CompilerConfig::default();
    let flip = compile("pulse f { shape=blackman dur=2us freq=165MHz amp=1.0 flip=1us } seq m { f; }", &ccfg).unwrap();
    let env = synthesize(&flip.schedule, &ccfg.clock, 1e9).unwrap();
    let (f_ref, _) = first_settings(&flip.schedule, &ccfg.clock);
    let area: f64 = env.samples.iter().map(|s| s.norm()).sum::<f64>() / env.sample_rate;
    let drive = DriveField::from_envelope(&env, PI / area, f_ref, 0.0);
    let back =
        evolve(BlochState::GROUND, &drive, env.duration_s(), drive.max_step()).unwrap().last().excited_population();

    let pass = worst < 1e-6 && ratio >= 8.0 && back < 1e-4;
    outcome(pass, format!("max |dP| {worst:.2e}, halving ratio {ratio:.1}, flip residual {back:.2e}"))
}

fn shaped_sidelobes() -> Outcome {
    let t = 1e-6;
    let rabi = PI / t;
    let boxed = DriveField { rabi_peak: rabi, detuning: 0.0, phase: 0.0, envelope: Envelope::Box { duration: t } };
    let tb = t / 0.42;
    let black =
        DriveField { rabi_peak: rabi, detuning: 0.0, phase: 0.0, envelope: Envelope::Blackman { duration: tb } };
    let (lo, hi) = (35f64.sqrt() * PI / t, 40.0 * PI / t);
    let dets: Vec<f64> = (0..=400).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect();
    let peak = |d: &DriveField, dur: f64| {
        excitation_profile(d, dur, &dets, d.max_step()).unwrap().iter().map(|p| p.1).fold(0.0, f64::max)
    };
    let (pb, pk) = (peak(&boxed, t), peak(&black, tb));
    let margin = db(pb / pk);
    outcome(margin >= 30.0, format!("box {pb:.2e}, Blackman {pk:.2e}, margin {margin:.1} dB"))
}

fn exclusions() -> Outcome {
    let mut with = ChainConfig::pulse_path();
    let mut without = with.clone();
    with.output_power_w = Some(40.0);
    without.output_power_w = None;
    let same = mix_spurs(165e6, &with).unwrap() == mix_spurs(165e6, &without).unwrap();
    outcome(
        same,
        "excluded: absolute output power (metadata only, spur levels unchanged), measured AM-noise figure, switch transients",
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 register resolutions", Duration::from_secs(1), table_resolutions),
        ("2 spur budget", Duration::from_secs(30), spur_budget),
        ("3 phase-noise integration", Duration::from_secs(1), noise_integration),
        ("4 noise synthesis round trip", Duration::from_secs(60), noise_round_trip),
        ("5 compiler golden schedules", Duration::from_secs(10), compiler_golden),
        ("6 Bloch oracle", Duration::from_secs(30), bloch_oracle),
        ("7 shaped-pulse sidelobes", Duration::from_secs(30), shaped_sidelobes),
        ("8 exclusions", Duration::from_secs(1), exclusions),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let o = run();
        let dt = start.elapsed();
        let pass = o.pass && dt < limit;
        failed += usize::from(!pass);
        let status = if pass { "PASS" } else { "FAIL" };
        println!("[{status}] {name}: {} ({:.2} s, limit {} s)", o.detail, dt.as_secs_f64(), limit.as_secs());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
