//! Name resolution, unit normalization and grid checks.

use std::collections::HashMap;

use super::ast::{
    DefinitionKind, PulseDefinition, PulseInstance, PulseParams, PulseProgram, RampProfile, SeqItem, WaveShape,
};
use super::parser::{RawDef, RawDefKind, RawInvocation, RawItem, RawKv, RawProgram, RawValue};
use super::Diagnostic;
use crate::dds::{quantize_settings, SysClock, GRID_NS};

enum Quantity {
    Time,
    Frequency,
    Angle,
    Plain,
}

fn diag(line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic { line, col, message: message.into(), expected: vec![] }
}

fn number(kv: &RawKv, q: Quantity) -> Result<f64, Diagnostic> {
    let RawValue::Number { value, unit } = &kv.value else {
        return Err(diag(kv.line, kv.col, format!("`{}` expects a number", kv.key)));
    };
    let unit = unit.as_deref();
    let scale = match (q, unit) {
        (Quantity::Time, Some("ns")) => 1.0,
        (Quantity::Time, Some("us" | "µs" | "μs")) => 1e3,
        (Quantity::Time, Some("ms")) => 1e6,
        (Quantity::Time, Some("s")) => 1e9,
        (Quantity::Frequency, Some("Hz")) => 1.0,
        (Quantity::Frequency, Some("kHz")) => 1e3,
        (Quantity::Frequency, Some("MHz")) => 1e6,
        (Quantity::Frequency, Some("GHz")) => 1e9,
        (Quantity::Angle, None | Some("rad")) => 1.0,
        (Quantity::Angle, Some("deg")) => std::f64::consts::PI / 180.0,
        (Quantity::Angle, Some("turn")) => std::f64::consts::TAU,
        (Quantity::Plain, None) => 1.0,
        (q, u) => {
            let want = match q {
                Quantity::Time => "a duration (ns, us, ms, s)",
                Quantity::Frequency => "a frequency (Hz, kHz, MHz, GHz)",
                Quantity::Angle => "an angle (rad, deg, turn)",
                Quantity::Plain => "a plain number",
            };
            return Err(diag(
                kv.line,
                kv.col,
                format!("`{}` expects {want}, got unit `{}`", kv.key, u.unwrap_or("none")),
            ));
        }
    };
    Ok(value * scale)
}

fn nanoseconds(kv: &RawKv) -> Result<u64, Diagnostic> {
    let ns = number(kv, Quantity::Time)?;
    let rounded = ns.round();
    if ns < 0.0 || (ns - rounded).abs() > 1e-6 {
        return Err(diag(kv.line, kv.col, format!("`{}` = {ns} ns is not a whole number of ns", kv.key)));
    }
    Ok(rounded as u64)
}

fn ident(kv: &RawKv) -> Result<&str, Diagnostic> {
    match &kv.value {
        RawValue::Ident(s) => Ok(s),
        _ => Err(diag(kv.line, kv.col, format!("`{}` expects a name", kv.key))),
    }
}

fn apply(params: &mut PulseParams, kind: RawDefKind, kv: &RawKv) -> Result<(), Diagnostic> {
    match (kv.key.as_str(), kind) {
        ("dur", _) => params.duration_ns = nanoseconds(kv)?,
        ("step", _) => params.step_ns = nanoseconds(kv)?,
        ("freq", _) => params.freq_hz = number(kv, Quantity::Frequency)?,
        ("amp", _) => params.amp = number(kv, Quantity::Plain)?,
        ("phase", _) => params.phase_rad = number(kv, Quantity::Angle)?,
        ("flip", _) => params.flip_ns = Some(nanoseconds(kv)?),
        ("shape", RawDefKind::Pulse) => {
            params.shape = match ident(kv)? {
                "rect" | "rectangular" | "box" => WaveShape::Rectangular,
                "linear" => WaveShape::Linear { edge_ns: None },
                "blackman" => WaveShape::Blackman,
                other => return Err(diag(kv.line, kv.col, format!("unknown pulse shape `{other}`"))),
            }
        }
        ("edge", RawDefKind::Pulse) => {
            let edge = nanoseconds(kv)?;
            match &mut params.shape {
                WaveShape::Linear { edge_ns } => *edge_ns = Some(edge),
                _ => return Err(diag(kv.line, kv.col, "`edge` applies to linear shapes only (set shape first)")),
            }
        }
        ("shape", RawDefKind::Ramp) | ("from", RawDefKind::Ramp) | ("to", RawDefKind::Ramp) => {
            let WaveShape::Ramp { from, to, profile } = &mut params.shape else { unreachable!() };
            match kv.key.as_str() {
                "shape" => {
                    *profile = match ident(kv)? {
                        "linear" => RampProfile::Linear,
                        "blackman" => RampProfile::Blackman,
                        other => return Err(diag(kv.line, kv.col, format!("unknown ramp shape `{other}`"))),
                    }
                }
                "from" => *from = number(kv, Quantity::Plain)?,
                _ => *to = number(kv, Quantity::Plain)?,
            }
        }
        (key, _) => return Err(diag(kv.line, kv.col, format!("unknown parameter `{key}`"))),
    }
    Ok(())
}

fn check(params: &PulseParams, clk: &SysClock, line: usize, col: usize, what: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut bad = |m: String| out.push(diag(line, col, format!("{what}: {m}")));
    let d = params.duration_ns;
    if d == 0 {
        bad("duration must be positive".into());
    } else if !d.is_multiple_of(GRID_NS) {
        bad(format!("duration {d} ns is not a multiple of {GRID_NS} ns"));
    }
    let s = params.step_ns;
    if s == 0 || !s.is_multiple_of(GRID_NS) {
        bad(format!("step {s} ns is not a positive multiple of {GRID_NS} ns"));
    } else if !d.is_multiple_of(s) {
        bad(format!("duration {d} ns is not a multiple of step {s} ns"));
    }
    if let Some(f) = params.flip_ns {
        if f == 0 || f >= d {
            bad(format!("flip at {f} ns lies outside the pulse"));
        } else if s > 0 && f % s != 0 {
            bad(format!("flip at {f} ns is not on the {s} ns RAM step"));
        }
    }
    if !(0.0..=1.0).contains(&params.amp) {
        bad(format!("amplitude {} is outside [0, 1]", params.amp));
    }
    if let WaveShape::Ramp { from, to, .. } = params.shape {
        for v in [from, to] {
            if !(0.0..=1.0).contains(&v) {
                bad(format!("ramp level {v} is outside [0, 1]"));
            }
        }
    }
    if quantize_settings(params.freq_hz, 0.0, 0.0, clk).is_err() {
        bad(format!("frequency {} Hz is outside [0, {}) Hz", params.freq_hz, clk.nyquist()));
    }
    if !params.phase_rad.is_finite() {
        bad("phase is not finite".into());
    }
    out
}

fn resolve_def(def: &RawDef, clk: &SysClock) -> Result<PulseDefinition, Vec<Diagnostic>> {
    let mut params = PulseParams {
        shape: match def.kind {
            RawDefKind::Pulse => WaveShape::Rectangular,
            RawDefKind::Ramp => WaveShape::Ramp { from: 0.0, to: 1.0, profile: RampProfile::Linear },
        },
        duration_ns: 0,
        step_ns: GRID_NS,
        freq_hz: 0.0,
        amp: 1.0,
        phase_rad: 0.0,
        flip_ns: None,
    };
    let mut errs = Vec::new();
    let (mut has_dur, mut has_freq) = (false, false);
    for kv in &def.params {
        has_dur |= kv.key == "dur";
        has_freq |= kv.key == "freq";
        if let Err(e) = apply(&mut params, def.kind, kv) {
            errs.push(e);
        }
    }
    if !has_dur {
        errs.push(diag(def.line, def.col, format!("`{}` is missing `dur`", def.name)));
    }
    if !has_freq {
        errs.push(diag(def.line, def.col, format!("`{}` is missing `freq`", def.name)));
    }
    if errs.is_empty() {
        errs.extend(check(&params, clk, def.line, def.col, &def.name));
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    let kind = match def.kind {
        RawDefKind::Pulse => DefinitionKind::Pulse,
        RawDefKind::Ramp => DefinitionKind::Ramp,
    };
    Ok(PulseDefinition { name: def.name.clone(), kind, params, line: def.line, col: def.col })
}

struct Resolver<'a> {
    defs: HashMap<String, (RawDefKind, Option<PulseParams>)>,
    clk: &'a SysClock,
    errs: Vec<Diagnostic>,
}

impl Resolver<'_> {
    fn instance(&mut self, inv: &RawInvocation) -> Option<PulseInstance> {
        let Some((kind, base)) = self.defs.get(&inv.name) else {
            self.errs.push(diag(inv.line, inv.col, format!("undefined pulse `{}`", inv.name)));
            return None;
        };
        // invalid definitions were already reported
        let mut params = base.clone()?;
        let kind = *kind;
        let mut ok = true;
        for kv in &inv.overrides {
            if let Err(e) = apply(&mut params, kind, kv) {
                self.errs.push(e);
                ok = false;
            }
        }
        if ok && !inv.overrides.is_empty() {
            let errs = check(&params, self.clk, inv.line, inv.col, &inv.name);
            ok = errs.is_empty();
            self.errs.extend(errs);
        }
        ok.then(|| PulseInstance { name: inv.name.clone(), params, line: inv.line, col: inv.col })
    }
}

pub(crate) fn resolve(raw: &RawProgram, clk: &SysClock) -> Result<PulseProgram, Vec<Diagnostic>> {
    let mut resolver = Resolver { defs: HashMap::new(), clk, errs: Vec::new() };
    let mut definitions = Vec::new();

    for def in &raw.defs {
        if resolver.defs.contains_key(&def.name) {
            resolver.errs.push(diag(def.line, def.col, format!("`{}` is defined twice", def.name)));
            continue;
        }
        match resolve_def(def, clk) {
            Ok(d) => {
                resolver.defs.insert(def.name.clone(), (def.kind, Some(d.params.clone())));
                definitions.push(d);
            }
            Err(e) => {
                resolver.defs.insert(def.name.clone(), (def.kind, None));
                resolver.errs.extend(e);
            }
        }
    }

    let mut sequence = Vec::new();
    for item in &raw.items {
        match item {
            RawItem::Invoke(inv) => {
                if let Some(p) = resolver.instance(inv) {
                    sequence.push(SeqItem::Pulse(p));
                }
            }
            RawItem::Wait { value, line, col } => {
                let kv = RawKv { key: "wait".into(), value: value.clone(), line: *line, col: *col };
                match nanoseconds(&kv) {
                    Ok(ns) if ns % GRID_NS != 0 => {
                        resolver.errs.push(diag(*line, *col, format!("wait {ns} ns is not a multiple of {GRID_NS} ns")))
                    }
                    Ok(ns) => sequence.push(SeqItem::Wait(ns)),
                    Err(e) => resolver.errs.push(e),
                }
            }
            RawItem::Merge { items, line, col } => {
                if items.is_empty() {
                    resolver.errs.push(diag(*line, *col, "empty merge block"));
                    continue;
                }
                let pulses: Vec<_> = items.iter().filter_map(|inv| resolver.instance(inv)).collect();
                if pulses.len() != items.len() {
                    continue;
                }
                let first = &pulses[0].params;
                let ftw = |p: &PulseParams| quantize_settings(p.freq_hz, 0.0, 0.0, clk).map(|w| w.ftw()).ok();
                for p in &pulses[1..] {
                    if ftw(&p.params) != ftw(first) {
                        resolver.errs.push(diag(
                            p.line,
                            p.col,
                            "merged pulses must share one frequency (RAM polar mode carries amplitude and phase only)",
                        ));
                    }
                    if p.params.step_ns != first.step_ns {
                        resolver.errs.push(diag(p.line, p.col, "merged pulses must share one RAM step"));
                    }
                }
                sequence.push(SeqItem::Merge(pulses));
            }
        }
    }

    if resolver.errs.is_empty() {
        Ok(PulseProgram { name: raw.seq_name.clone(), definitions, sequence })
    } else {
        Err(resolver.errs)
    }
}
