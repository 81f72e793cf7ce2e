//! Coherent two-level dynamics under the synthesized drive.
//!
//! Rotating-frame Bloch equations, no damping:
//!
//! ```text
//! du/dt = -D v - R sin(p) w
//! dv/dt =  D u + R cos(p) w
//! dw/dt =  R sin(p) u - R cos(p) v
//! ```
//!
//! with Rabi rate `R(t)`, drive phase `p(t)` and detuning `D`. The Bloch
//! vector rotates about `(-R cos p, -R sin p, D)`; `w = -1` is the ground state.

mod analysis;
mod bloch;

use thiserror::Error;

pub use analysis::{adiabaticity, composite_scan, dressed_shift, excitation_profile, FidelityMap};
pub use bloch::{evolve, propagate, rabi_formula, BlochState, DriveField, Envelope, Trajectory, STEPS_PER_PERIOD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtomError {
    #[error("step {dt} s exceeds the stability bound {max} s")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("mixing angle undefined at t = {t} s (no drive and no detuning)")]
    UndefinedMixingAngle { t: f64 },
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
}
