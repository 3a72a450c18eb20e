//! Duhamel boundary-forcing operators for the linear Airy flow on half
//! lines: the base operator V with kernel A, its derivative companion
//! V_inv, and the one-parameter families V_minus^lambda / V_plus^lambda
//! obtained by one-sided spatial convolution. Also assembles and solves
//! the vertex linear system M [gamma; theta] = F for the forcing
//! amplitudes.
//!
//! Numerics: time integration is product quadrature against exact lag
//! moments of the kernel (piecewise-linear data), with oscillation-adaptive
//! Gauss panels on the negative axis and an integration-by-parts boundary
//! term once the phase outruns the panel budget. The weak endpoint
//! singularity (t - t')^p at t' = t is absorbed by a sigma = tau^{1/3}
//! substitution on the first lag.

use crate::error::{Error, Result};
use crate::fft::convolve;
use crate::fracops::frac_integral;
use crate::graph::StarGraphSpec;
use crate::linalg::DenseLuC;
use crate::matrix::{
    invertibility, term_d, term_rho, VertexMatrix, DEFAULT_COND_CAP, DEFAULT_DET_TOL,
};
use crate::signal::{smooth_bump, SampledSignal};
use crate::special::{airy_kernel, airy_kernel_prime, gamma};
use num_complex::Complex64;
use std::f64::consts::PI;

pub use crate::special::{airy_kernel as kernel, airy_kernel_prime as kernel_prime};

const C3: f64 = 0.693_361_274_350_634_8; // 3^(-1/3)
const QT: f64 = 0.384_900_179_459_750_5; // (2/3) 3^(-1/2); phase = QT |x|^{3/2} tau^{-1/2}

// Gauss-Legendre 6 on [-1, 1]
const GX: [f64; 6] = [
    -0.932_469_514_203_152_1,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_1,
];
const GW: [f64; 6] = [
    0.171_324_492_379_170_4,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_4,
];

const PHASE_PER_PANEL: f64 = 1.5;
const MAX_PANELS_PER_LAG: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Operator output sampled on an (x, t) product grid.
#[derive(Clone, Debug)]
pub struct ForcingEvaluation {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// values[ix][it]
    pub values: Vec<Vec<Complex64>>,
    pub lambda: f64,
    pub side: Side,
}

#[derive(Clone, Copy)]
enum Kern {
    A,
    Ap,
}

fn kern_at(which: Kern, z: f64) -> f64 {
    match which {
        Kern::A => airy_kernel(z),
        Kern::Ap => airy_kernel_prime(z),
    }
}

fn kern_zero(which: Kern) -> f64 {
    match which {
        Kern::A => airy_kernel(0.0),
        Kern::Ap => airy_kernel_prime(0.0),
    }
}

/// Oscillatory-regime envelope of the kernel at z = x / tau^{1/3} -> -inf:
/// A ~ C cos(zeta - pi/4), A' ~ C' sin(zeta - pi/4).
fn asymp_amp(which: Kern, x: f64, tau: f64) -> f64 {
    let v = C3 * x.abs() * tau.powf(-1.0 / 3.0);
    match which {
        Kern::A => C3 / (PI.sqrt() * v.powf(0.25)),
        Kern::Ap => C3 * C3 * v.powf(0.25) / PI.sqrt(),
    }
}

/// Gauss panel over [a, b] of K(x / tau^{1/3}) tau^p {1, (tau - l0dt)/dt}.
fn gauss_panel(which: Kern, x: f64, p: f64, a: f64, b: f64, l0dt: f64, dt: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (mut w0, mut w1) = (0.0, 0.0);
    for q in 0..6 {
        let tt = mid + half * GX[q];
        let kv = kern_at(which, x * tt.powf(-1.0 / 3.0)) * tt.powf(p);
        w0 += GW[q] * kv;
        w1 += GW[q] * kv * (tt - l0dt) / dt;
    }
    (w0 * half, w1 * half)
}

/// Boundary term of integration by parts at tau, oscillatory regime x < 0:
/// the antiderivative in the phase variable divided by the phase rate.
fn ibp_term(which: Kern, x: f64, p: f64, tau: f64, l0dt: f64, dt: f64) -> (f64, f64) {
    let zeta = QT * x.abs().powf(1.5) * tau.powf(-0.5);
    let dzeta = -0.5 * QT * x.abs().powf(1.5) * tau.powf(-1.5);
    let camp = asymp_amp(which, x, tau);
    let t0 = match which {
        Kern::A => camp * tau.powf(p) * (zeta - PI / 4.0).sin() / dzeta,
        Kern::Ap => -camp * tau.powf(p) * (zeta - PI / 4.0).cos() / dzeta,
    };
    (t0, t0 * (tau - l0dt) / dt)
}

/// Exact moments of K(x / tau^{1/3}) tau^p against {1, (tau - l dt)/dt} on
/// each lag interval [l dt, (l+1) dt].
fn lag_moments(which: Kern, x: f64, p: f64, n: usize, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t0 = vec![0.0; n];
    let mut t1 = vec![0.0; n];
    if x == 0.0 {
        let k0 = kern_zero(which);
        let e1 = p + 1.0;
        let e2 = p + 2.0;
        for l in 0..n {
            let lf = l as f64;
            let d1 = (lf + 1.0).powf(e1) - lf.powf(e1);
            let d2 = (lf + 1.0).powf(e2) - lf.powf(e2);
            t0[l] = k0 * dt.powf(e1) * d1 / e1;
            t1[l] = k0 * dt.powf(e1) * (d2 / e2 - lf * d1 / e1);
        }
        return (t0, t1);
    }
    let osc = x < 0.0;
    let budget = MAX_PANELS_PER_LAG as f64 * PHASE_PER_PANEL;
    for l in 0..n {
        let a = l as f64 * dt;
        let b = (l + 1) as f64 * dt;
        if l == 0 {
            // sigma-substitution tau = s^3: integrand 3 K(x/s) s^{3p+2},
            // integrated over a geometric cascade of s-intervals downward
            // from dt^{1/3} until the envelope is negligible
            let (mut w0, mut w1) = (0.0, 0.0);
            let mut s_hi = dt.powf(1.0 / 3.0);
            let mut depth = 0;
            while depth < 60 {
                let s_lo = s_hi * 0.55;
                let dz = if osc {
                    QT * x.abs().powf(1.5) * (s_lo.powf(-1.5) - s_hi.powf(-1.5))
                } else {
                    0.0
                };
                if osc && dz > budget {
                    // remaining [0, tau_hi]: boundary term [F] = F(tau_hi)
                    let tau_hi = s_hi * s_hi * s_hi;
                    let (a0, a1) = ibp_term(which, x, p, tau_hi, 0.0, dt);
                    w0 += a0;
                    w1 += a1;
                    break;
                }
                let nsub = (dz / PHASE_PER_PANEL).ceil().max(1.0) as usize;
                for ii in 0..nsub {
                    let aa = s_lo + (s_hi - s_lo) * ii as f64 / nsub as f64;
                    let bb = s_lo + (s_hi - s_lo) * (ii + 1) as f64 / nsub as f64;
                    let mid = 0.5 * (aa + bb);
                    let half = 0.5 * (bb - aa);
                    for q in 0..6 {
                        let ss = mid + half * GX[q];
                        let kv = 3.0 * kern_at(which, x / ss) * ss.powf(3.0 * p + 2.0);
                        let tt = ss * ss * ss;
                        w0 += GW[q] * kv * half;
                        w1 += GW[q] * kv * tt / dt * half;
                    }
                }
                s_hi = s_lo;
                let env = if osc {
                    3.0 * asymp_amp(which, x, s_hi.powi(3)) * s_hi.powf(3.0 * p + 2.0) * s_hi
                } else {
                    3.0 * kern_at(which, x / s_hi).abs() * s_hi.powf(3.0 * p + 2.0) * s_hi
                };
                if env < 1e-13 {
                    break;
                }
                depth += 1;
            }
            t0[0] = w0;
            t1[0] = w1;
        } else {
            let dz = if osc {
                QT * x.abs().powf(1.5) * (a.powf(-0.5) - b.powf(-0.5))
            } else {
                0.0
            };
            if osc && dz > budget {
                // the linear weight (tau - a)/dt vanishes at the left end
                let (a0, a1) = ibp_term(which, x, p, a, a, dt);
                let (b0, b1) = ibp_term(which, x, p, b, a, dt);
                t0[l] = b0 - a0;
                t1[l] = b1 - a1;
            } else {
                let nsub = (dz / PHASE_PER_PANEL).ceil().max(1.0) as usize;
                let (mut w0, mut w1) = (0.0, 0.0);
                for ii in 0..nsub {
                    let aa = a + (b - a) * ii as f64 / nsub as f64;
                    let bb = a + (b - a) * (ii + 1) as f64 / nsub as f64;
                    let (g0, g1) = gauss_panel(which, x, p, aa, bb, a, dt);
                    w0 += g0;
                    w1 += g1;
                }
                t0[l] = w0;
                t1[l] = w1;
            }
        }
    }
    (t0, t1)
}

fn check_forcing_input(g: &SampledSignal) -> Result<()> {
    if !g.support_positive {
        return Err(Error::validation(
            "forcing operators require a signal supported on t >= 0",
        ));
    }
    if g.t0 != 0.0 {
        return Err(Error::validation(format!(
            "forcing operators require the time grid to start at 0, got t0 = {}",
            g.t0
        )));
    }
    if g.len() < 2 {
        return Err(Error::validation(
            "forcing operators need at least two time samples",
        ));
    }
    Ok(())
}

/// Core Duhamel evaluation: 3 * conv_t(I_mu g, lag weights of the kernel)
/// at each grid x. Piecewise-linear hat weights are assembled from the lag
/// moments so the convolution is exact for piecewise-linear data.
fn duhamel_field(
    which: Kern,
    p: f64,
    mu: f64,
    g: &SampledSignal,
    xs: &[f64],
) -> Result<Vec<Vec<Complex64>>> {
    check_forcing_input(g)?;
    let n = g.len();
    let dt = g.dt;
    let h = frac_integral(g, mu)?;
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let (t0, t1) = lag_moments(which, x, p, n, dt);
        let mut w = vec![Complex64::new(0.0, 0.0); n + 1];
        w[0] = Complex64::new(t0[0] - t1[0], 0.0);
        for d in 1..n {
            w[d] = Complex64::new(t0[d] - t1[d] + t1[d - 1], 0.0);
        }
        w[n] = Complex64::new(t1[n - 1], 0.0);
        let conv = convolve(&h.values, &w);
        out.push(conv[..n].iter().map(|&c| 3.0 * c).collect());
    }
    Ok(out)
}

fn t_grid_of(g: &SampledSignal) -> Vec<f64> {
    (0..g.len()).map(|i| g.time(i)).collect()
}

/// V g(x,t): Duhamel integral of the kernel A against I_{-2/3} g, with
/// trace V g(0,t) = g(t).
pub fn forcing_v(g: &SampledSignal, x_grid: &[f64]) -> Result<ForcingEvaluation> {
    let values = duhamel_field(Kern::A, -1.0 / 3.0, -2.0 / 3.0, g, x_grid)?;
    Ok(ForcingEvaluation {
        x_grid: x_grid.to_vec(),
        t_grid: t_grid_of(g),
        values,
        lambda: 0.0,
        side: Side::Minus,
    })
}

/// V^{-1} g(x,t) = d/dx V I_{1/3} g(x,t), evaluated directly through the
/// A' kernel; trace V^{-1} g(0,t) = -g(t).
pub fn forcing_v_inv(g: &SampledSignal, x_grid: &[f64]) -> Result<ForcingEvaluation> {
    let values = duhamel_field(Kern::Ap, -2.0 / 3.0, -1.0 / 3.0, g, x_grid)?;
    Ok(ForcingEvaluation {
        x_grid: x_grid.to_vec(),
        t_grid: t_grid_of(g),
        values,
        lambda: -1.0,
        side: Side::Minus,
    })
}

/// Default spatial grid for class-operator convolutions: fine uniform zone
/// near the vertex, coarsening by factors of two, truncated where the
/// oscillatory field has decayed. Symmetric about x = 0, which is a node.
pub fn default_x_grid(dt: f64) -> Vec<f64> {
    let d1 = (1.6 * dt.sqrt()).clamp(0.02, 0.1);
    let xmax = (0.632 / dt.sqrt()).clamp(20.0, 45.0);
    let mut pos = Vec::new();
    let mut v = 0.0;
    while v < 1.5 {
        pos.push(v);
        v += d1;
    }
    let mut v = pos[pos.len() - 1] + 2.0 * d1;
    while v < 4.0 {
        pos.push(v);
        v += 2.0 * d1;
    }
    let mut v = pos[pos.len() - 1] + 4.0 * d1;
    while v < xmax + 1e-12 {
        pos.push(v);
        v += 4.0 * d1;
    }
    // mirror all positive nodes except the leading 0, so 0 appears once
    let mut grid: Vec<f64> = pos.iter().rev().take(pos.len() - 1).map(|&x| -x).collect();
    grid.extend_from_slice(&pos);
    grid
}

/// Exact moments of z^{lam-1}/Gamma(lam) {1, (z - za)} over [za, zb].
fn onesided_moments(lam: f64, gam: f64, za: f64, zb: f64) -> (f64, f64) {
    let m0 = (zb.powf(lam) - za.powf(lam)) / lam / gam;
    let m1 = ((zb.powf(lam + 1.0) - za.powf(lam + 1.0)) / (lam + 1.0)
        - za * (zb.powf(lam) - za.powf(lam)) / lam)
        / gam;
    (m0, m1)
}

/// One-sided convolution (z_+^{lam-1}/Gamma(lam) * W)(x) for every
/// requested x, integrating the piecewise-linear field W exactly against
/// the kernel moments. side Minus reads W(x - z), Plus reads W(x + z) and
/// multiplies by e^{i pi lam}.
fn class_convolve(
    lam: f64,
    side: Side,
    wgrid: &[f64],
    w: &[Vec<Complex64>],
    xs: &[f64],
    nt: usize,
) -> Vec<Vec<Complex64>> {
    let gam = gamma(lam);
    let phase = match side {
        Side::Minus => Complex64::new(1.0, 0.0),
        Side::Plus => Complex64::new(0.0, PI * lam).exp(),
    };
    // value of W at arbitrary x by linear interpolation on the field grid
    let interp = |x: f64| -> Vec<Complex64> {
        if x <= wgrid[0] {
            return w[0].clone();
        }
        if x >= wgrid[wgrid.len() - 1] {
            return w[wgrid.len() - 1].clone();
        }
        let j = wgrid.partition_point(|&g| g <= x) - 1;
        let frac = (x - wgrid[j]) / (wgrid[j + 1] - wgrid[j]);
        (0..nt)
            .map(|t| w[j][t] + (w[j + 1][t] - w[j][t]) * frac)
            .collect()
    };
    xs.iter()
        .map(|&x| {
            let mut acc = vec![Complex64::new(0.0, 0.0); nt];
            // spine of field nodes on the integration side of x, nearest first
            let mut nodes: Vec<(f64, Vec<Complex64>)> = vec![(0.0, interp(x))];
            match side {
                Side::Minus => {
                    for j in (0..wgrid.len()).rev() {
                        if wgrid[j] < x {
                            nodes.push((x - wgrid[j], w[j].clone()));
                        }
                    }
                }
                Side::Plus => {
                    for j in 0..wgrid.len() {
                        if wgrid[j] > x {
                            nodes.push((wgrid[j] - x, w[j].clone()));
                        }
                    }
                }
            }
            for pair in nodes.windows(2) {
                let (za, ref wa) = pair[0];
                let (zb, ref wb) = pair[1];
                let (m0, m1) = onesided_moments(lam, gam, za, zb);
                let inv_dz = 1.0 / (zb - za);
                for t in 0..nt {
                    let slope = (wb[t] - wa[t]) * inv_dz;
                    acc[t] += wa[t] * m0 + slope * m1;
                }
            }
            acc.iter().map(|&c| phase * c).collect()
        })
        .collect()
}

/// Direct class evaluation for lam in (0, 1): one-sided convolution of the
/// base field V(I_{-lam/3} g) computed on the default grid.
fn class_direct(g: &SampledSignal, lam: f64, side: Side, xs: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let wgrid = default_x_grid(g.dt);
    let mu = -(2.0 + lam) / 3.0;
    let w = duhamel_field(Kern::A, -1.0 / 3.0, mu, g, &wgrid)?;
    Ok(class_convolve(lam, side, &wgrid, &w, xs, g.len()))
}

/// First x-derivative on a (possibly nonuniform) grid by 3-point stencils,
/// exact for quadratics; one-sided at the ends.
fn ddx(xs: &[f64], v: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let nx = xs.len();
    let nt = v[0].len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); nt]; nx];
    for i in 0..nx {
        let (j0, j1, j2) = if i == 0 {
            (0, 1, 2)
        } else if i == nx - 1 {
            (nx - 3, nx - 2, nx - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (xs[j0], xs[j1], xs[j2]);
        let xi = xs[i];
        // derivative of the Lagrange quadratic through the three nodes
        let c0 = (2.0 * xi - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let c1 = (2.0 * xi - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let c2 = (2.0 * xi - x0 - x1) / ((x2 - x0) * (x2 - x1));
        for t in 0..nt {
            out[i][t] = v[j0][t] * c0 + v[j1][t] * c1 + v[j2][t] * c2;
        }
    }
    out
}

/// V_minus^lambda / V_plus^lambda for lambda in (-2, 1/2].
///
/// Dispatch: lambda = 0 is V itself; lambda = -1 is V^{-1}; lambda in
/// (0, 1/2] is the direct one-sided convolution; lambda in (-1, 0) is
/// d/dx of the class at lambda+1 applied to I_{1/3} g; lambda in (-2, -1)
/// is d2/dx2 of the class at lambda+2 applied to I_{2/3} g. The derivative
/// forms need at least three x-grid points.
pub fn forcing_v_class(
    g: &SampledSignal,
    lambda: f64,
    side: Side,
    x_grid: &[f64],
) -> Result<ForcingEvaluation> {
    check_forcing_input(g)?;
    let mut eval = if lambda == 0.0 {
        forcing_v(g, x_grid)?
    } else if lambda == -1.0 {
        forcing_v_inv(g, x_grid)?
    } else if lambda > 0.0 && lambda <= 0.5 {
        ForcingEvaluation {
            x_grid: x_grid.to_vec(),
            t_grid: t_grid_of(g),
            values: class_direct(g, lambda, side, x_grid)?,
            lambda,
            side,
        }
    } else if lambda > -1.0 && lambda < 0.0 {
        if x_grid.len() < 3 {
            return Err(Error::validation(
                "derivative-form class operators need at least 3 x-grid points",
            ));
        }
        let gi = frac_integral(g, 1.0 / 3.0)?;
        let base = class_direct(&gi, lambda + 1.0, side, x_grid)?;
        ForcingEvaluation {
            x_grid: x_grid.to_vec(),
            t_grid: t_grid_of(g),
            values: ddx(x_grid, &base),
            lambda,
            side,
        }
    } else if lambda > -2.0 && lambda < -1.0 {
        if x_grid.len() < 3 {
            return Err(Error::validation(
                "derivative-form class operators need at least 3 x-grid points",
            ));
        }
        let gi = frac_integral(g, 2.0 / 3.0)?;
        let base = class_direct(&gi, lambda + 2.0, side, x_grid)?;
        ForcingEvaluation {
            x_grid: x_grid.to_vec(),
            t_grid: t_grid_of(g),
            values: ddx(x_grid, &ddx(x_grid, &base)),
            lambda,
            side,
        }
    } else {
        return Err(Error::validation(format!(
            "class operator order must lie in (-2, 1/2], got {lambda}"
        )));
    };
    eval.lambda = lambda;
    eval.side = side;
    Ok(eval)
}

/// Trace targets at x = 0 for each operator, as multiples of g(t).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    V,
    VInv,
    VMinus,
    VPlus,
}

impl TraceOp {
    pub fn parse(s: &str) -> Result<TraceOp> {
        match s {
            "V" => Ok(TraceOp::V),
            "Vinv" => Ok(TraceOp::VInv),
            "Vminus" => Ok(TraceOp::VMinus),
            "Vplus" => Ok(TraceOp::VPlus),
            other => Err(Error::validation(format!(
                "unknown trace operator '{other}' (expected V, Vinv, Vminus, Vplus)"
            ))),
        }
    }

    /// Exact trace factor: the operator applied to g, evaluated at x = 0,
    /// equals factor * g(t).
    pub fn exact_factor(&self, lambda: f64) -> Complex64 {
        match self {
            TraceOp::V => Complex64::new(1.0, 0.0),
            TraceOp::VInv => Complex64::new(-1.0, 0.0),
            TraceOp::VMinus => Complex64::new(term_rho(lambda), 0.0),
            TraceOp::VPlus => term_d(lambda),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceCheck {
    pub op: TraceOp,
    pub lambda: f64,
    pub dt: f64,
    pub exact_factor: Complex64,
    pub rel_error: f64,
}

/// Measure a trace identity on the standard smooth bump over [0, 2]:
/// evaluate the operator at x = 0 and compare with exact_factor * g in
/// relative L2.
pub fn trace_check(op: TraceOp, lambda: f64, dt: f64) -> Result<TraceCheck> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::validation(format!("dt must be positive, got {dt}")));
    }
    let n = (2.0 / dt).round() as usize + 1;
    let g = smooth_bump(n, dt, 0.25, 1.75)?;
    let eval = match op {
        TraceOp::V => forcing_v(&g, &[0.0])?,
        TraceOp::VInv => forcing_v_inv(&g, &[0.0])?,
        TraceOp::VMinus => forcing_v_class(&g, lambda, Side::Minus, &[0.0])?,
        TraceOp::VPlus => forcing_v_class(&g, lambda, Side::Plus, &[0.0])?,
    };
    let factor = op.exact_factor(lambda);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in eval.values[0].iter().enumerate() {
        let want = factor * g.values[i];
        num += (v - want).norm_sqr();
        den += want.norm_sqr();
    }
    Ok(TraceCheck {
        op,
        lambda,
        dt,
        exact_factor: factor,
        rel_error: (num / den).sqrt(),
    })
}

/// Vertex traces of the free evolution of the initial data: values and x-
/// derivative traces at the vertex for every edge, on one time grid.
#[derive(Clone, Debug)]
pub struct TraceData {
    pub f_traces: Vec<SampledSignal>,
    pub g_traces: Vec<SampledSignal>,
    pub dx_f: Vec<SampledSignal>,
    pub dx_g: Vec<SampledSignal>,
    pub dxx_f: Vec<SampledSignal>,
    pub dxx_g: Vec<SampledSignal>,
}

impl TraceData {
    fn validate(&self, spec: &StarGraphSpec) -> Result<(f64, f64, usize)> {
        let (k, m) = (spec.k, spec.m);
        if self.f_traces.len() != k
            || self.dx_f.len() != k
            || self.dxx_f.len() != k
            || self.g_traces.len() != m
            || self.dx_g.len() != m
            || self.dxx_g.len() != m
        {
            return Err(Error::validation(format!(
                "trace data needs {k} negative-edge and {m} positive-edge signals per block"
            )));
        }
        let all = self
            .f_traces
            .iter()
            .chain(&self.g_traces)
            .chain(&self.dx_f)
            .chain(&self.dx_g)
            .chain(&self.dxx_f)
            .chain(&self.dxx_g);
        let mut grid: Option<(f64, f64, usize)> = None;
        for s in all {
            let this = (s.t0, s.dt, s.len());
            match grid {
                None => grid = Some(this),
                Some(gr) if gr == this => {}
                Some(gr) => {
                    return Err(Error::validation(format!(
                        "trace signals disagree on the time grid: {:?} vs {:?}",
                        gr, this
                    )))
                }
            }
        }
        grid.ok_or_else(|| Error::validation("trace data is empty"))
    }
}

/// Right-hand side F(t) of the vertex system, one complex vector of length
/// 2k+m per time sample. Value rows combine raw traces; derivative rows
/// apply I_{1/3} to first-derivative traces; the last row applies I_{2/3}
/// to second-derivative traces with the 1/a weights.
pub fn build_rhs(spec: &StarGraphSpec, traces: &TraceData) -> Result<Vec<Vec<Complex64>>> {
    let violations = spec.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::validation(lines.join("; ")));
    }
    let (_, _, nt) = traces.validate(spec)?;
    let (k, m) = (spec.k, spec.m);
    let n = 2 * k + m;
    let i13_f: Vec<SampledSignal> = traces
        .dx_f
        .iter()
        .map(|s| frac_integral(s, 1.0 / 3.0))
        .collect::<Result<_>>()?;
    let i13_g: Vec<SampledSignal> = traces
        .dx_g
        .iter()
        .map(|s| frac_integral(s, 1.0 / 3.0))
        .collect::<Result<_>>()?;
    let i23_f: Vec<SampledSignal> = traces
        .dxx_f
        .iter()
        .map(|s| frac_integral(s, 2.0 / 3.0))
        .collect::<Result<_>>()?;
    let i23_g: Vec<SampledSignal> = traces
        .dxx_g
        .iter()
        .map(|s| frac_integral(s, 2.0 / 3.0))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..k {
            row[i - 1] = -traces.f_traces[0].values[t] + spec.a[i] * traces.f_traces[i].values[t];
        }
        for j in 0..m {
            row[k - 1 + j] =
                -traces.f_traces[0].values[t] + spec.a[k + j] * traces.g_traces[j].values[t];
        }
        for i in 0..k {
            let mut v = i13_f[i].values[t];
            for j in 0..m {
                v -= spec.b[i][j] * i13_g[j].values[t];
            }
            row[k + m - 1 + i] = v;
        }
        let mut v = Complex64::new(0.0, 0.0);
        for i in 0..k {
            v -= i23_f[i].values[t] / spec.a[i];
        }
        for j in 0..m {
            v += i23_g[j].values[t] / spec.a[k + j];
        }
        row[n - 1] = v;
        out.push(row);
    }
    Ok(out)
}

/// Forcing amplitudes: two per negative edge, one per positive edge, as
/// time signals.
#[derive(Clone, Debug)]
pub struct ForcingSolution {
    pub gamma1: Vec<SampledSignal>,
    pub gamma2: Vec<SampledSignal>,
    pub theta: Vec<SampledSignal>,
}

/// Solve M x = F(t) for every time sample with one LU factorization.
/// Errors if M fails the invertibility thresholds.
pub fn solve_forcing(m: &VertexMatrix, rhs: &[Vec<Complex64>], dt: f64) -> Result<ForcingSolution> {
    let inv = invertibility(m, DEFAULT_DET_TOL, DEFAULT_COND_CAP);
    if !inv.invertible {
        return Err(Error::numeric(format!(
            "vertex matrix is not safely invertible: |det| = {:.3e}, condition estimate = {:.3e}",
            inv.abs_det, inv.condition_estimate
        )));
    }
    let n = m.n;
    for (t, row) in rhs.iter().enumerate() {
        if row.len() != n {
            return Err(Error::validation(format!(
                "rhs at sample {t} has length {}, expected {n}",
                row.len()
            )));
        }
    }
    let lu = DenseLuC::factor(&m.entries, n);
    let k = m.graph.k;
    let msize = m.graph.m;
    let nt = rhs.len();
    let mut cols = vec![vec![Complex64::new(0.0, 0.0); nt]; n];
    for (t, row) in rhs.iter().enumerate() {
        let x = lu.solve(row)?;
        for (c, &v) in x.iter().enumerate() {
            cols[c][t] = v;
        }
    }
    let sig = |vals: Vec<Complex64>| SampledSignal::new(0.0, dt, vals, true);
    let mut gamma1 = Vec::with_capacity(k);
    let mut gamma2 = Vec::with_capacity(k);
    for i in 0..k {
        gamma1.push(sig(std::mem::take(&mut cols[2 * i]))?);
        gamma2.push(sig(std::mem::take(&mut cols[2 * i + 1]))?);
    }
    let mut theta = Vec::with_capacity(msize);
    for j in 0..msize {
        theta.push(sig(std::mem::take(&mut cols[2 * k + j]))?);
    }
    Ok(ForcingSolution {
        gamma1,
        gamma2,
        theta,
    })
}
