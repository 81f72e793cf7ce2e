use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use mwforge_core::compiler::{compile, Action, CompilerConfig, EventSchedule};
use mwforge_core::dds::{dequantize, SysClock};
use serde::de::DeserializeOwned;

use crate::fail::{Failure, PARSE};

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

/// Write `text` to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
            }
            fs::write(p, text).map_err(|e| Failure::io(p, e))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

/// Explicit path if given, else `name` inside the config directory if it exists.
pub fn locate(explicit: Option<&Path>, config_dir: Option<&Path>, name: &str) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| config_dir.map(|d| d.join(name)).filter(|p| p.is_file()))
}

pub fn parse_toml<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    toml::from_str(&read(path)?).map_err(|e| Failure::new(PARSE, format!("config: {}: {e}", path.display())))
}

pub fn compiler_config(path: Option<PathBuf>) -> Result<CompilerConfig, Failure> {
    path.map_or(Ok(CompilerConfig::default()), |p| parse_toml(&p))
}

/// Schedule from a `.json` file written by `compile`, or compiled from source.
pub fn load_schedule(path: &Path, cfg: &CompilerConfig) -> Result<EventSchedule, Failure> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        EventSchedule::from_json(&text).map_err(|e| Failure::new(PARSE, format!("schedule: {}: {e}", path.display())))
    } else {
        Ok(compile(&text, cfg)?.schedule)
    }
}

/// Frequency of the first register load and the largest programmed amplitude.
pub fn carrier(schedule: &EventSchedule, clk: &SysClock) -> (Option<f64>, f64) {
    let mut freq = None;
    let mut amp: f64 = 0.0;
    for ev in &schedule.events {
        if let Action::SetRegisters(w) = &ev.action {
            let s = dequantize(w, clk);
            freq.get_or_insert(s.frequency);
            amp = amp.max(s.amplitude);
        }
    }
    (freq, amp)
}

/// `f1:f2` in Hz.
pub fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected f1:f2, got `{s}`"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(a)?, num(b)?))
}
