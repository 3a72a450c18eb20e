//! Uniformly sampled complex time signals supported on [0, infinity), the
//! common currency between the fractional-calculus operators, the boundary
//! forcing evaluators, and the CLI.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// A complex signal sampled at t_n = t0 + n dt.
#[derive(Clone, Debug)]
pub struct SampledSignal {
    /// grid origin, typically 0
    pub t0: f64,
    /// uniform step, > 0
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// asserts f(t) = 0 for t < 0 (and interpolation below the grid returns 0)
    pub support_positive: bool,
}

impl SampledSignal {
    pub fn new(
        t0: f64,
        dt: f64,
        values: Vec<Complex64>,
        support_positive: bool,
    ) -> Result<SampledSignal> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::validation(format!(
                "signal step dt must be positive and finite, got {dt}"
            )));
        }
        if !t0.is_finite() {
            return Err(Error::validation("signal origin t0 must be finite"));
        }
        Ok(SampledSignal {
            t0,
            dt,
            values,
            support_positive,
        })
    }

    /// Real-valued signal from samples.
    pub fn from_real(t0: f64, dt: f64, values: &[f64], support_positive: bool) -> Result<Self> {
        Self::new(
            t0,
            dt,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            support_positive,
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }

    /// Linear interpolation on the grid; strictly below the grid start this
    /// returns 0 for positively supported signals and clamps otherwise. The
    /// grid start itself is a sample.
    pub fn value_at(&self, t: f64) -> Complex64 {
        if self.values.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let s = (t - self.t0) / self.dt;
        if s < 0.0 {
            return if self.support_positive {
                Complex64::new(0.0, 0.0)
            } else {
                self.values[0]
            };
        }
        let i = s.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Relative L2 distance to another signal on the shared prefix.
    pub fn rel_l2_error(&self, other: &SampledSignal) -> f64 {
        let n = self.len().min(other.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            num += (self.values[i] - other.values[i]).norm_sqr();
            den += other.values[i].norm_sqr();
        }
        (num / den.max(1e-300)).sqrt()
    }
}

/// C-infinity compactly supported bump exp(-1/((t-lo)(hi-t))) on (lo, hi),
/// zero outside, scaled so the peak value is exactly 1.
pub fn smooth_bump(n: usize, dt: f64, lo: f64, hi: f64) -> Result<SampledSignal> {
    if !(hi > lo) {
        return Err(Error::validation(format!(
            "bump support needs hi > lo, got [{lo}, {hi}]"
        )));
    }
    if lo < 0.0 {
        return Err(Error::validation(
            "bump support must lie in t >= 0 for positively supported signals",
        ));
    }
    let half = (hi - lo) / 2.0;
    let peak = (-1.0 / (half * half)).exp();
    let values: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            if t > lo && t < hi {
                Complex64::new((-1.0 / ((t - lo) * (hi - t))).exp() / peak, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SampledSignal::new(0.0, dt, values, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        let g = smooth_bump(2001, 1e-3, 0.25, 1.75).unwrap();
        // peak value 1 at the center sample t = 1.0
        assert!((g.values[1000].re - 1.0).abs() < 1e-14);
        // zero outside the support, including the endpoints
        assert_eq!(g.values[0].re, 0.0);
        assert_eq!(g.values[250].re, 0.0);
        assert_eq!(g.values[1750].re, 0.0);
        assert_eq!(g.values[2000].re, 0.0);
        // strictly positive inside
        assert!(g.values[500].re > 0.0 && g.values[500].re < 1.0);
    }

    #[test]
    fn interpolation_respects_support() {
        let f = SampledSignal::from_real(0.0, 0.5, &[2.0, 4.0, 6.0], true).unwrap();
        assert_eq!(f.value_at(-0.1), Complex64::new(0.0, 0.0));
        assert!((f.value_at(0.25).re - 3.0).abs() < 1e-14);
        assert!((f.value_at(10.0).re - 6.0).abs() < 1e-14);
        let g = SampledSignal::from_real(0.0, 0.5, &[2.0, 4.0], false).unwrap();
        assert_eq!(g.value_at(-0.1).re, 2.0);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(SampledSignal::from_real(0.0, 0.0, &[1.0], true).is_err());
        assert!(SampledSignal::from_real(0.0, -1.0, &[1.0], true).is_err());
        assert!(smooth_bump(10, 0.1, 1.0, 0.5).is_err());
        assert!(smooth_bump(10, 0.1, -0.5, 0.5).is_err());
    }
}
