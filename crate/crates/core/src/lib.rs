//! Simulator and pulse-program compiler for a dual-path, DDS-based
//! low-phase-noise microwave source.
//!
//! The crate is organised along the signal path:
//!
//! - [`dds`]: bit-accurate DDS channel (register quantization, RAM profiles,
//!   phase-coherent baseband synthesis).
//! - [`compiler`]: pulse-language parser, RAM profile allocation and the
//!   latency-aware event scheduler on the 4 ns grid.
//! - [`rf`]: up-mixing, spur generation, bandpass filtering and output spectra.
//! - [`noise`]: phase/AM noise tables, closed-form integration and
//!   time-domain noise synthesis.
//! - [`atom`]: two-level-atom Bloch dynamics driven by the synthesized field.
//!
//! [`spectral`] holds the windowed periodogram machinery shared by `rf` and
//! `noise`.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod compiler;
pub mod dds;
pub mod noise;
pub mod rf;
pub mod spectral;

pub use rustfft::num_complex::Complex64;
