use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AtomError;
use crate::dds::ComplexEnvelope;

/// Fewest integration steps per period of the fastest rotation.
pub const STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState { u: 0.0, v: 0.0, w: -1.0 };
    pub const EXCITED: BlochState = BlochState { u: 0.0, v: 0.0, w: 1.0 };

    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn excited_population(&self) -> f64 {
        (1.0 + self.w) / 2.0
    }

    fn axpy(&self, a: f64, d: &BlochState) -> BlochState {
        BlochState { u: self.u + a * d.u, v: self.v + a * d.v, w: self.w + a * d.w }
    }
}

/// Shape of the drive amplitude in time, as a fraction of `rabi_peak`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Constant,
    Box {
        duration: f64,
    },
    /// Blackman window over `[0, duration]`, peak 1 at the centre.
    Blackman {
        duration: f64,
    },
    /// Zero-order hold: sample `k` applies on `[k step, (k+1) step)`.
    Sampled {
        step: f64,
        amplitude: Vec<f64>,
        phase: Vec<f64>,
    },
}

/// Drive in the rotating frame: Rabi rate `rabi_peak * a(t)`, phase
/// `phase + phi(t)` and a fixed detuning, all angular (rad/s, rad).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    pub rabi_peak: f64,
    pub detuning: f64,
    #[serde(default)]
    pub phase: f64,
    pub envelope: Envelope,
}

impl DriveField {
    pub fn constant(rabi: f64, phase: f64, detuning: f64) -> Self {
        Self { rabi_peak: rabi, detuning, phase, envelope: Envelope::Constant }
    }

    /// Drive seen by the atom from a DDS envelope demodulated at `f_ref`.
    /// The lower mixing sideband conjugates the DDS phase.
    pub fn from_envelope(env: &ComplexEnvelope, rabi_peak: f64, f_ref: f64, detuning: f64) -> Self {
        let step = 1.0 / env.sample_rate;
        let (mut amplitude, mut phase) = (Vec::with_capacity(env.len()), Vec::with_capacity(env.len()));
        for (k, s) in env.samples.iter().enumerate() {
            let t = env.time_ns(k) * 1e-9;
            let base = s * crate::Complex64::from_polar(1.0, -TAU * f_ref * t);
            amplitude.push(s.norm());
            phase.push(if s.norm() > 0.0 { -base.arg() } else { 0.0 });
        }
        Self { rabi_peak, detuning, phase: 0.0, envelope: Envelope::Sampled { step, amplitude, phase } }
    }

    pub fn with_detuning(&self, detuning: f64) -> Self {
        Self { detuning, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), AtomError> {
        let finite = self.rabi_peak.is_finite() && self.detuning.is_finite() && self.phase.is_finite();
        if !finite || self.rabi_peak < 0.0 {
            return Err(AtomError::InvalidDrive(format!("rabi_peak {} / detuning {}", self.rabi_peak, self.detuning)));
        }
        match &self.envelope {
            Envelope::Sampled { step, amplitude, phase } => {
                if !(*step > 0.0) || amplitude.len() != phase.len() {
                    return Err(AtomError::InvalidDrive("sampled drive needs step > 0 and matching lengths".into()));
                }
                if amplitude.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                    return Err(AtomError::InvalidDrive("sampled amplitudes must be finite and >= 0".into()));
                }
            }
            Envelope::Box { duration } | Envelope::Blackman { duration } if !(*duration > 0.0) => {
                return Err(AtomError::InvalidDrive("pulse duration must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// Natural length of the drive; `None` for a constant drive.
    pub fn duration(&self) -> Option<f64> {
        match &self.envelope {
            Envelope::Constant => None,
            Envelope::Box { duration } | Envelope::Blackman { duration } => Some(*duration),
            Envelope::Sampled { step, amplitude, .. } => Some(step * amplitude.len() as f64),
        }
    }

    /// Largest Rabi rate the drive reaches.
    pub fn rabi_max(&self) -> f64 {
        match &self.envelope {
            Envelope::Sampled { amplitude, .. } => self.rabi_peak * amplitude.iter().copied().fold(0.0, f64::max),
            _ => self.rabi_peak,
        }
    }

    /// Largest step `evolve` accepts.
    pub fn max_step(&self) -> f64 {
        let rate = self.rabi_max().max(self.detuning.abs());
        if rate > 0.0 {
            TAU / (STEPS_PER_PERIOD * rate)
        } else {
            f64::INFINITY
        }
    }

    /// `(rabi, phase)` at `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        match &self.envelope {
            Envelope::Constant => (self.rabi_peak, self.phase),
            Envelope::Box { duration } => {
                let on = (0.0..*duration).contains(&t);
                (if on { self.rabi_peak } else { 0.0 }, self.phase)
            }
            Envelope::Blackman { duration } => {
                let a = if (0.0..=*duration).contains(&t) { crate::dds::blackman(t / duration) } else { 0.0 };
                (self.rabi_peak * a, self.phase)
            }
            Envelope::Sampled { step, amplitude, phase } => {
                let k = (t / step).floor();
                if k < 0.0 || k as usize >= amplitude.len() {
                    (0.0, self.phase)
                } else {
                    let k = k as usize;
                    (self.rabi_peak * amplitude[k], self.phase + phase[k])
                }
            }
        }
    }

    fn held(&self) -> bool {
        matches!(self.envelope, Envelope::Box { .. } | Envelope::Sampled { .. })
    }
}

fn derivative(s: &BlochState, rabi: f64, phase: f64, det: f64) -> BlochState {
    let (sp, cp) = phase.sin_cos();
    let (ox, oy) = (rabi * cp, rabi * sp);
    BlochState { u: -det * s.v - oy * s.w, v: det * s.u + ox * s.w, w: oy * s.u - ox * s.v }
}

/// One classic RK4 step. Piecewise-constant drives are held at their
/// mid-step value so steps on the sample grid integrate each hold exactly.
fn rk4_step(s: &BlochState, drive: &DriveField, t: f64, h: f64) -> BlochState {
    let det = drive.detuning;
    let (d0, d_mid, d1) = if drive.held() {
        let m = drive.at(t + h / 2.0);
        (m, m, m)
    } else {
        (drive.at(t), drive.at(t + h / 2.0), drive.at(t + h))
    };
    let k1 = derivative(s, d0.0, d0.1, det);
    let k2 = derivative(&s.axpy(h / 2.0, &k1), d_mid.0, d_mid.1, det);
    let k3 = derivative(&s.axpy(h / 2.0, &k2), d_mid.0, d_mid.1, det);
    let k4 = derivative(&s.axpy(h, &k3), d1.0, d1.1, det);
    BlochState {
        u: s.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
        v: s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
        w: s.w + h / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w),
    }
}

/// Step sizes used for `duration`: uniform, and aligned to the sample grid
/// for sampled drives.
fn plan_steps(drive: &DriveField, duration: f64, dt: f64) -> Result<(f64, usize), AtomError> {
    if !(dt > 0.0 && duration >= 0.0 && duration.is_finite()) {
        return Err(AtomError::InvalidDrive(format!("need dt > 0 and duration >= 0, got {dt}, {duration}")));
    }
    drive.validate()?;
    let max = drive.max_step();
    if dt > max * (1.0 + 1e-12) {
        return Err(AtomError::StepTooLarge { dt, max });
    }
    let h = match &drive.envelope {
        Envelope::Sampled { step, .. } => step / (step / dt - 1e-9).ceil().max(1.0),
        _ => dt,
    };
    let n = ((duration / h) - 1e-9).ceil().max(0.0) as usize;
    let h = if matches!(drive.envelope, Envelope::Sampled { .. }) || n == 0 { h } else { duration / n as f64 };
    Ok((h, n))
}

/// Sampled solution of the Bloch equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
}

impl Trajectory {
    pub fn last(&self) -> BlochState {
        *self.states.last().expect("trajectory holds the initial state")
    }

    /// `t_s,u,v,w,p_excited` table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,u,v,w,p_excited\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = writeln!(out, "{t:e},{},{},{},{}", s.u, s.v, s.w, s.excited_population());
        }
        out
    }
}

fn march(
    initial: BlochState,
    drive: &DriveField,
    duration: f64,
    dt: f64,
    mut visit: impl FnMut(f64, &BlochState),
) -> Result<BlochState, AtomError> {
    let (h, n) = plan_steps(drive, duration, dt)?;
    let mut s = initial;
    let mut t = 0.0;
    visit(t, &s);
    for i in 0..n {
        let step = if i + 1 == n { duration - t } else { h };
        s = rk4_step(&s, drive, t, step);
        t = if i + 1 == n { duration } else { (i + 1) as f64 * h };
        visit(t, &s);
    }
    Ok(s)
}

/// Integrate from `initial` over `[0, duration]` with fixed-step RK4.
/// `dt` may not exceed one fiftieth of the fastest rotation period.
pub fn evolve(initial: BlochState, drive: &DriveField, duration: f64, dt: f64) -> Result<Trajectory, AtomError> {
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new() };
    march(initial, drive, duration, dt, |t, s| {
        traj.times.push(t);
        traj.states.push(*s);
    })?;
    Ok(traj)
}

/// Final state only; same integration as [`evolve`].
pub fn propagate(initial: BlochState, drive: &DriveField, duration: f64, dt: f64) -> Result<BlochState, AtomError> {
    march(initial, drive, duration, dt, |_, _| {})
}

/// Closed-form excited population from the ground state under a constant drive.
pub fn rabi_formula(rabi: f64, detuning: f64, t: f64) -> f64 {
    let g2 = rabi * rabi + detuning * detuning;
    if g2 == 0.0 {
        return 0.0;
    }
    rabi * rabi / g2 * (g2.sqrt() * t / 2.0).sin().powi(2)
}
