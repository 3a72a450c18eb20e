//! Riemann-Liouville fractional integrals I_alpha and derivatives I_{-alpha}
//! on sampled signals supported in [0, infinity).
//!
//! I_alpha f(t) = (1/Gamma(alpha)) int_0^t (t-s)^{alpha-1} f(s) ds is
//! discretized by product integration: the singular kernel is integrated
//! exactly against the piecewise-linear interpolant of f (second order for
//! smooth f). Fractional derivatives differentiate the smoothed integral:
//! I_{-alpha} f = (d/dt)^ceil(alpha) I_{ceil(alpha)-alpha} f.

use crate::error::{Error, Result};
use crate::fft;
use crate::signal::SampledSignal;
use crate::special::gamma;
use num_complex::Complex64;

fn check_input(f: &SampledSignal) -> Result<()> {
    if !f.support_positive {
        return Err(Error::validation(
            "fractional operators require positively supported signals",
        ));
    }
    if f.t0 != 0.0 {
        return Err(Error::validation(format!(
            "fractional operators require the grid to start at t = 0, got t0 = {}",
            f.t0
        )));
    }
    Ok(())
}

/// Fractional integral I_alpha. alpha = 0 is the identity; alpha < 0 routes
/// to `frac_derivative`.
pub fn frac_integral(f: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    check_input(f)?;
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    if alpha < 0.0 {
        return frac_derivative(f, -alpha);
    }
    let n = f.len();
    if n == 0 {
        return Ok(f.clone());
    }
    let dt = f.dt;
    // product-trapezoid weights: out_n = dt^a/Gamma(a+2) *
    //   (sum_{j=1}^{n} c_{n-j} f_j + b_n f_0), out_0 = 0
    let scale = dt.powf(alpha) / gamma(alpha + 2.0);
    let ap1 = alpha + 1.0;
    let c: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                1.0
            } else {
                let df = d as f64;
                (df + 1.0).powf(ap1) - 2.0 * df.powf(ap1) + (df - 1.0).powf(ap1)
            }
        })
        .collect();
    let cc: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let conv = fft::convolve(&f.values, &cc);
    let f0 = f.values[0];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, o) in out.iter_mut().enumerate().skip(1) {
        let nf = i as f64;
        let b0 = (nf - 1.0).powf(ap1) - nf.powf(alpha) * (nf - alpha - 1.0);
        *o = scale * (conv[i] - c[i] * f0 + b0 * f0);
    }
    SampledSignal::new(0.0, dt, out, true)
}

/// Fractional derivative I_{-alpha} for alpha > 0, as the k-th finite
/// difference of I_{k-alpha} f with k = ceil(alpha). alpha = 0 is the
/// identity; alpha < 0 routes to `frac_integral`.
pub fn frac_derivative(f: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    check_input(f)?;
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    if alpha < 0.0 {
        return frac_integral(f, -alpha);
    }
    let k = alpha.ceil() as usize;
    let mut g = frac_integral(f, k as f64 - alpha)?;
    if g.len() < 3 {
        return Err(Error::validation(
            "fractional derivative needs at least 3 samples",
        ));
    }
    for _ in 0..k {
        g = diff_once(&g)?;
    }
    // distributional support: values at t <= 0 are exactly 0
    if !g.values.is_empty() {
        g.values[0] = Complex64::new(0.0, 0.0);
    }
    Ok(g)
}

/// Second-order first derivative: central interior, one-sided 3-point ends.
fn diff_once(f: &SampledSignal) -> Result<SampledSignal> {
    let n = f.len();
    let dt = f.dt;
    let v = &f.values;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
    }
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    SampledSignal::new(0.0, dt, out, true)
}
