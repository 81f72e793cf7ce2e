use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::RfError;

/// Deterministic passband ripple: a single sinusoid in frequency, zero at
/// the centre and extremal at the passband edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RippleSpec {
    /// Peak ripple within `inner_halfwidth` of the centre, dB.
    pub inner_db: f64,
    pub inner_halfwidth: f64,
    /// Peak ripple within `outer_halfwidth` of the centre, dB.
    pub outer_db: f64,
    pub outer_halfwidth: f64,
}

impl Default for RippleSpec {
    fn default() -> Self {
        Self { inner_db: 0.2, inner_halfwidth: 5e6, outer_db: 1.0, outer_halfwidth: 25e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub f_center: f64,
    /// Full width of the flat region.
    pub passband_width: f64,
    pub stop_atten_db: f64,
    /// Offset from the centre at which `stop_atten_db` is reached.
    pub stop_offset: f64,
    pub ripple: RippleSpec,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            f_center: 6.835e9,
            passband_width: 20e6,
            stop_atten_db: 50.0,
            stop_offset: 250e6,
            ripple: RippleSpec::default(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), RfError> {
        let half = self.passband_width / 2.0;
        let r = &self.ripple;
        let ok = self.f_center > 0.0
            && half > 0.0
            && self.stop_offset > half
            && self.stop_atten_db >= 0.0
            && r.inner_halfwidth > 0.0
            && r.inner_halfwidth < half
            && r.outer_halfwidth >= half
            && r.inner_db >= 0.0
            && r.outer_db >= r.inner_db;
        if ok {
            Ok(())
        } else {
            Err(RfError::InvalidConfig(format!("inconsistent filter parameters: {self:?}")))
        }
    }

    fn half_width(&self) -> f64 {
        self.passband_width / 2.0
    }
}

/// Ripple gain in dB at `f`.
///
/// `gain(d) = E(|d|) * sin(pi/2 * d / h)` with `d = f - f_center` and `h` the
/// passband half width. `E` is flat inside the inner band, chosen so the
/// extremum there equals `inner_db`, then rises linearly to `outer_db` at `h`
/// and stays there.
pub fn passband_gain(f: f64, filter: &FilterConfig) -> f64 {
    let d = f - filter.f_center;
    let h = filter.half_width();
    let r = &filter.ripple;
    let e_inner = r.inner_db / (FRAC_PI_2 * r.inner_halfwidth / h).sin();
    let a = d.abs();
    let envelope = if a <= r.inner_halfwidth {
        e_inner
    } else if a < h {
        e_inner + (r.outer_db - e_inner) * (a - r.inner_halfwidth) / (h - r.inner_halfwidth)
    } else {
        r.outer_db
    };
    envelope * (FRAC_PI_2 * d / h).sin()
}

/// Attenuation in dB at `f`: the negated ripple inside the passband,
/// log-frequency interpolation to `stop_atten_db` at `stop_offset`, and
/// constant beyond.
pub fn attenuation(f: f64, filter: &FilterConfig) -> f64 {
    let a = (f - filter.f_center).abs();
    let h = filter.half_width();
    if a <= h {
        -passband_gain(f, filter)
    } else if a >= filter.stop_offset {
        filter.stop_atten_db
    } else {
        filter.stop_atten_db * (a / h).ln() / (filter.stop_offset / h).ln()
    }
}

/// Anything carrying levels at known frequencies that a filter can act on.
pub trait Attenuable {
    fn attenuated(&self, filter: &FilterConfig) -> Self;
}

/// Reduce every component's level by the filter attenuation at its frequency.
pub fn apply_filter<T: Attenuable>(x: &T, filter: &FilterConfig) -> T {
    x.attenuated(filter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FilterConfig {
        FilterConfig::default()
    }

    fn max_abs_gain(span: f64) -> f64 {
        let f = cfg();
        (0..=20_000)
            .map(|i| f.f_center - span + 2.0 * span * i as f64 / 20_000.0)
            .map(|x| passband_gain(x, &f).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn centre_and_stop_points() {
        let f = cfg();
        assert_eq!(passband_gain(f.f_center, &f), 0.0);
        assert_eq!(attenuation(f.f_center, &f), 0.0);
        assert_eq!(attenuation(f.f_center + 250e6, &f), 50.0);
        assert_eq!(attenuation(f.f_center - 250e6, &f), 50.0);
        assert_eq!(attenuation(f.f_center + 1e9, &f), 50.0);
    }

    #[test]
    fn ripple_maxima() {
        assert!((max_abs_gain(5e6) - 0.2).abs() < 1e-9);
        assert!((max_abs_gain(25e6) - 1.0).abs() < 1e-9);
        // extrema sit on the passband edges
        let f = cfg();
        assert!((passband_gain(f.f_center + 10e6, &f) - 1.0).abs() < 1e-12);
        assert!((passband_gain(f.f_center - 10e6, &f) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn skirt_is_monotone_beyond_edge() {
        let f = cfg();
        let mut prev = 0.0;
        for i in 1..=10_000 {
            let d = 10e6 + 300e6 * i as f64 / 10_000.0;
            for s in [1.0, -1.0] {
                let a = attenuation(f.f_center + s * d, &f);
                assert!(a >= prev - 1e-12);
            }
            prev = attenuation(f.f_center + d, &f);
        }
    }

    #[test]
    fn log_interpolation_oracle() {
        let f = cfg();
        // 165 MHz from the centre: 50 * log(16.5) / log(25)
        let expect = 50.0 * 16.5f64.log10() / 25f64.log10();
        assert!((attenuation(7.0e9, &f) - expect).abs() < 1e-9);
        assert!((expect - 43.546).abs() < 1e-3);
        assert!((attenuation(f.f_center + 50e6, &f) - 25.0).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        assert!(cfg().validate().is_ok());
        let mut f = cfg();
        f.ripple.inner_halfwidth = 12e6;
        assert!(f.validate().is_err());
        let mut f = cfg();
        f.stop_offset = 5e6;
        assert!(f.validate().is_err());
    }
}
