use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bloch::{propagate, BlochState, DriveField, Envelope};
use super::AtomError;

/// Extra refinement below the step bound used by the sweeps.
const SWEEP_REFINE: f64 = 8.0;

/// Excited population after `duration` from the ground state, per detuning.
/// The step is `min(dt, bound)` where the bound tightens with detuning.
pub fn excitation_profile(
    drive: &DriveField,
    duration: f64,
    detunings: &[f64],
    dt: f64,
) -> Result<Vec<(f64, f64)>, AtomError> {
    detunings
        .iter()
        .map(|&det| {
            let d = drive.with_detuning(det);
            let step = dt.min(d.max_step());
            Ok((det, propagate(BlochState::GROUND, &d, duration, step)?.excited_population()))
        })
        .collect()
}

/// Composite-pulse robustness map: rows are fractional Rabi errors, columns
/// detunings, entries the inversion fidelity `(1 + w) / 2` from the ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityMap {
    pub amp_errors: Vec<f64>,
    pub detunings: Vec<f64>,
    pub fidelity: Vec<Vec<f64>>,
}

impl FidelityMap {
    /// Matrix CSV: header row `eps\detuning,d0,d1,...`, one row per error.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps\\detuning");
        for d in &self.detunings {
            let _ = write!(out, ",{d}");
        }
        out.push('\n');
        for (e, row) in self.amp_errors.iter().zip(&self.fidelity) {
            let _ = write!(out, "{e}");
            for f in row {
                let _ = write!(out, ",{f}");
            }
            out.push('\n');
        }
        out
    }
}

/// Run `sequence` of `(area, phase)` rectangular pulses back to back at
/// nominal Rabi rate `rabi`, scaled by `1 + eps`, for every grid point.
pub fn composite_scan(
    sequence: &[(f64, f64)],
    rabi: f64,
    amp_errors: &[f64],
    detunings: &[f64],
) -> Result<FidelityMap, AtomError> {
    if !(rabi > 0.0 && rabi.is_finite()) {
        return Err(AtomError::InvalidDrive(format!("nominal Rabi rate must be positive, got {rabi}")));
    }
    let mut fidelity = Vec::with_capacity(amp_errors.len());
    for &eps in amp_errors {
        let mut row = Vec::with_capacity(detunings.len());
        for &det in detunings {
            let r = (rabi * (1.0 + eps)).max(0.0);
            let mut s = BlochState::GROUND;
            for &(area, phase) in sequence {
                let d = DriveField::constant(r, phase, det);
                let duration = area.abs() / rabi;
                let step = d.max_step().min(duration.max(f64::MIN_POSITIVE)) / SWEEP_REFINE;
                s = propagate(s, &d, duration, step)?;
            }
            row.push(s.excited_population());
        }
        fidelity.push(row);
    }
    Ok(FidelityMap { amp_errors: amp_errors.to_vec(), detunings: detunings.to_vec(), fidelity })
}

/// Light shift of the dressed level adiabatically connected to the bare
/// state: `(sign(d) sqrt(d^2 + r^2) - d) / 2`, and `r / 2` on resonance.
pub fn dressed_shift(rabi: f64, detuning: f64) -> f64 {
    if detuning == 0.0 {
        return rabi / 2.0;
    }
    (detuning.signum() * detuning.hypot(rabi) - detuning) / 2.0
}

/// Largest `|d theta/dt| / sqrt(rabi^2 + detuning^2)` along the drive, with
/// mixing angle `theta = atan2(rabi, detuning) / 2` and central differences.
/// Analytic envelopes are sampled at `samples` points.
pub fn adiabaticity(drive: &DriveField, samples: usize) -> Result<f64, AtomError> {
    drive.validate()?;
    let det = drive.detuning;
    let (h, rabi): (f64, Vec<f64>) = match (&drive.envelope, drive.duration()) {
        (Envelope::Constant, _) | (_, None) => {
            if drive.rabi_peak == 0.0 && det == 0.0 {
                return Err(AtomError::UndefinedMixingAngle { t: 0.0 });
            }
            return Ok(0.0);
        }
        (Envelope::Sampled { step, amplitude, .. }, _) => {
            (*step, amplitude.iter().map(|a| a * drive.rabi_peak).collect())
        }
        (_, Some(duration)) => {
            let n = samples.max(3);
            let h = duration / (n - 1) as f64;
            (h, (0..n).map(|i| drive.at((i as f64 * h).min(duration * (1.0 - 1e-15))).0).collect())
        }
    };
    if let Some(i) = rabi.iter().position(|&r| r == 0.0 && det == 0.0) {
        return Err(AtomError::UndefinedMixingAngle { t: i as f64 * h });
    }
    if rabi.len() < 2 {
        return Ok(0.0);
    }
    let theta: Vec<f64> = rabi.iter().map(|&r| 0.5 * r.atan2(det)).collect();
    let n = theta.len();
    let mut worst: f64 = 0.0;
    for (i, r) in rabi.iter().enumerate() {
        let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
        let dtheta = (theta[b] - theta[a]) / ((b - a) as f64 * h);
        worst = worst.max(dtheta.abs() / r.hypot(det));
    }
    Ok(worst)
}
