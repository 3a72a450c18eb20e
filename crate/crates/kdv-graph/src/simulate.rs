//! Crank–Nicolson simulation of w_t + w_xxx + w w_x = 0 on a truncated star
//! graph. The k negative edges live on (-L, 0], the m positive edges on
//! [0, L); the 2k + m vertex conditions (value chain, first-derivative
//! coupling through B, weighted second-derivative balance) are imposed as
//! algebraic constraint rows of the implicit system, so they hold exactly at
//! the end of every linear solve.
//!
//! Far-end closure: homogeneous Dirichlet at both truncation ends, plus a
//! homogeneous Neumann row at the outflow side of each positive edge. The
//! inflow ends (x = -L) carry Dirichlet only, with a one-sided interior PDE
//! row at the adjacent node; adding a Neumann row there over-determines the
//! outflow characteristics and makes the one-step operator unstable.

use crate::error::{Error, Result};
use crate::graph::{CouplingClass, InitialData, StarGraphSpec};
use crate::linalg::{Banded, BorderedSolver};

/// Default ceiling for the far-end amplitude diagnostic (fraction of the
/// initial amplitude). Exceeding it flags the truncation window as suspect;
/// it never aborts a run.
pub const DEFAULT_FAR_TOLERANCE: f64 = 1e-6;

/// Minimum number of grid cells per edge (the vertex conditions and the
/// order-3 residual stencils each need several nodes of clearance).
const MIN_CELLS: usize = 8;

/// Grid fields for one simulation: k arrays sampled on (-L, 0] followed by
/// m arrays on [0, L), all with the same node count.
#[derive(Clone, Debug)]
pub struct GraphGridState {
    pub spec: StarGraphSpec,
    /// edge truncation length (each edge spans L)
    pub l: f64,
    /// spatial step; snapped so that L is an integer number of cells
    pub h: f64,
    /// k negative-edge arrays (index N is the vertex) then m positive-edge
    /// arrays (index 0 is the vertex), each of length N + 1
    pub fields: Vec<Vec<f64>>,
    /// current time
    pub t: f64,
    /// whether steps include the explicit transport term w w_x
    pub nonlinear: bool,
    /// stored ceiling for the far-end amplitude fraction diagnostic
    pub far_tolerance: f64,
}

impl GraphGridState {
    /// Zero-field state on the truncated graph. `h` is snapped to L/N with
    /// N = round(L/h); fewer than MIN_CELLS cells per edge is rejected.
    pub fn new(spec: &StarGraphSpec, l: f64, h: f64, nonlinear: bool) -> Result<Self> {
        let spec = spec.clone().validated()?;
        if !(l.is_finite() && l > 0.0) || !(h.is_finite() && h > 0.0) {
            return Err(Error::validation(format!(
                "edge length and grid step must be positive (got L = {l}, h = {h})"
            )));
        }
        let ncells = (l / h).round() as usize;
        if ncells < MIN_CELLS {
            return Err(Error::validation(format!(
                "grid too coarse: L/h = {:.3} cells per edge, need at least {}",
                l / h,
                MIN_CELLS
            )));
        }
        let npts = ncells + 1;
        let edges = spec.edges();
        Ok(GraphGridState {
            spec,
            l,
            h: l / ncells as f64,
            fields: vec![vec![0.0; npts]; edges],
            t: 0.0,
            nonlinear,
            far_tolerance: DEFAULT_FAR_TOLERANCE,
        })
    }

    /// State initialized by resampling edge profiles onto the grid. The
    /// truncation length is the widest profile span: max of -t0 over the
    /// negative-edge signals and of the last sample time over the positive
    /// ones. Profiles narrower than L extend by their own end behavior.
    pub fn from_initial(
        spec: &StarGraphSpec,
        initial: &InitialData,
        h: f64,
        nonlinear: bool,
    ) -> Result<Self> {
        if initial.u0.len() != spec.k || initial.v0.len() != spec.m {
            return Err(Error::validation(format!(
                "initial data has {}+{} edge profiles, graph has {}+{}",
                initial.u0.len(),
                initial.v0.len(),
                spec.k,
                spec.m
            )));
        }
        let mut l = 0.0f64;
        for f in &initial.u0 {
            l = l.max(-f.t0);
        }
        for f in &initial.v0 {
            l = l.max(f.t0 + (f.len().saturating_sub(1)) as f64 * f.dt);
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::validation(
                "initial profiles span no positive edge length",
            ));
        }
        let mut state = GraphGridState::new(spec, l, h, nonlinear)?;
        let n = state.npts() - 1;
        for (i, f) in initial.u0.iter().enumerate() {
            for q in 0..=n {
                let x = -state.l + q as f64 * state.h;
                state.fields[i][q] = f.value_at(x).re;
            }
        }
        for (j, f) in initial.v0.iter().enumerate() {
            for q in 0..=n {
                let x = q as f64 * state.h;
                state.fields[spec.k + j][q] = f.value_at(x).re;
            }
        }
        Ok(state)
    }

    /// Nodes per edge (N + 1).
    pub fn npts(&self) -> usize {
        self.fields[0].len()
    }

    /// Largest absolute field value over the whole graph.
    pub fn amplitude(&self) -> f64 {
        self.fields
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    /// Per-edge discrete L2 norms (trapezoid rule).
    pub fn l2_edges(&self) -> Vec<f64> {
        self.fields
            .iter()
            .map(|f| {
                let sumsq: f64 = f.iter().map(|&v| v * v).sum();
                let ends = 0.5 * (f[0] * f[0] + f[f.len() - 1] * f[f.len() - 1]);
                (self.h * (sumsq - ends)).max(0.0).sqrt()
            })
            .collect()
    }

    /// Total discrete L2 norm: sqrt of the summed per-edge squares.
    pub fn l2_total(&self) -> f64 {
        self.l2_edges()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest absolute value among the three nodes adjacent to each far end
    /// (the closure nodes themselves are pinned to zero and excluded).
    pub fn far_amplitude(&self) -> f64 {
        let n = self.npts() - 1;
        let mut far = 0.0f64;
        for (e, f) in self.fields.iter().enumerate() {
            let probe = if e < self.spec.k {
                &f[1..4]
            } else {
                &f[n - 3..n]
            };
            for &v in probe {
                far = far.max(v.abs());
            }
        }
        far
    }
}

/// Vertex-condition residuals measured from the current fields with
/// one-sided finite differences of order 3:
/// r_value  = max over i, j of |u_1(0) - a_i u_i(0)| and |u_1(0) - a_{k+j} v_j(0)|;
/// r_deriv  = max over i of |d/dx u_i(0) - sum_j B[i][j] d/dx v_j(0)|;
/// r_second = |sum_i a_i^{-1} d2/dx2 u_i(0) - sum_j a_{k+j}^{-1} d2/dx2 v_j(0)|.
pub fn vertex_residual(state: &GraphGridState) -> (f64, f64, f64) {
    let k = state.spec.k;
    let m = state.spec.m;
    let a = &state.spec.a;
    let b = &state.spec.b;
    let h = state.h;
    let n = state.npts() - 1;
    let d1_neg = |f: &[f64]| {
        (11.0 * f[n] - 18.0 * f[n - 1] + 9.0 * f[n - 2] - 2.0 * f[n - 3]) / (6.0 * h)
    };
    let d1_pos =
        |f: &[f64]| (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
    let d2_neg = |f: &[f64]| {
        (35.0 * f[n] - 104.0 * f[n - 1] + 114.0 * f[n - 2] - 56.0 * f[n - 3]
            + 11.0 * f[n - 4])
            / (12.0 * h * h)
    };
    let d2_pos = |f: &[f64]| {
        (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4])
            / (12.0 * h * h)
    };
    let u10 = state.fields[0][n];
    let mut r_value = 0.0f64;
    for i in 0..k {
        r_value = r_value.max((u10 - a[i] * state.fields[i][n]).abs());
    }
    for j in 0..m {
        r_value = r_value.max((u10 - a[k + j] * state.fields[k + j][0]).abs());
    }
    let mut r_deriv = 0.0f64;
    for i in 0..k {
        let mut s = d1_neg(&state.fields[i]);
        for j in 0..m {
            s -= b[i][j] * d1_pos(&state.fields[k + j]);
        }
        r_deriv = r_deriv.max(s.abs());
    }
    let mut r_second = 0.0f64;
    for i in 0..k {
        r_second += d2_neg(&state.fields[i]) / a[i];
    }
    for j in 0..m {
        r_second -= d2_pos(&state.fields[k + j]) / a[k + j];
    }
    (r_value, r_deriv, r_second.abs())
}

/// One factored Crank–Nicolson step operator: solve (I + dt/2 D3 | rows
/// replaced by conditions) w_new = (I - dt/2 D3 | condition rows zeroed) w.
struct Stepper {
    npts: usize,
    solver: BorderedSolver,
    rhs: Banded,
}

impl Stepper {
    /// dt must be positive; the caller handles backward stepping.
    fn build(spec: &StarGraphSpec, h: f64, npts: usize, dt: f64) -> Result<Stepper> {
        let k = spec.k;
        let m = spec.m;
        let edges = k + m;
        let nn = npts - 1;
        let n = edges * npts;
        let off: Vec<usize> = (0..edges).map(|e| e * npts).collect();
        let h3 = h * h * h;
        let ctr = [-1.0, 2.0, 0.0, -2.0, 1.0].map(|c| c / (2.0 * h3));
        let skw = [-1.5, 5.0, -6.0, 3.0, -0.5].map(|c| c / h3);
        let mut mp = Banded::new(n, 3, 3);
        let mut mm = Banded::new(n, 3, 3);
        for e in 0..edges {
            let o = off[e];
            // one-sided PDE row next to the far closure of negative edges;
            // kept on positive edges too (their node o is a vertex slot)
            let row = o + 1;
            mp.set(row, row, 1.0);
            mm.set(row, row, 1.0);
            for (q, &c) in skw.iter().enumerate() {
                mp.add(row, o + q, 0.5 * dt * c);
                mm.add(row, o + q, -0.5 * dt * c);
            }
            for j in 2..=nn - 2 {
                let row = o + j;
                mp.set(row, row, 1.0);
                mm.set(row, row, 1.0);
                for (q, &c) in ctr.iter().enumerate() {
                    mp.add(row, o + j - 2 + q, 0.5 * dt * c);
                    mm.add(row, o + j - 2 + q, -0.5 * dt * c);
                }
            }
            if e < k {
                // far Dirichlet; vertex slots at o+N-1, o+N stay identity
                // in the banded core (condition content goes in the border)
                mp.set(o, o, 1.0);
                mp.set(o + nn - 1, o + nn - 1, 1.0);
                mp.set(o + nn, o + nn, 1.0);
            } else {
                // far Neumann + Dirichlet; vertex slot at o
                mp.set(o + nn - 1, o + nn - 2, 1.0 / (2.0 * h));
                mp.set(o + nn - 1, o + nn - 1, -4.0 / (2.0 * h));
                mp.set(o + nn - 1, o + nn, 3.0 / (2.0 * h));
                mp.set(o + nn, o + nn, 1.0);
                mp.set(o, o, 1.0);
            }
        }
        // vertex slots and condition rows, in matching order
        let mut slots: Vec<usize> = Vec::with_capacity(2 * k + m);
        for e in 0..k {
            slots.push(off[e] + nn - 1);
            slots.push(off[e] + nn);
        }
        for e in k..edges {
            slots.push(off[e]);
        }
        let vidx = |e: usize| off[e] + if e < k { nn } else { 0 };
        let a = &spec.a;
        let mut conds: Vec<Vec<(usize, f64)>> = Vec::with_capacity(2 * k + m);
        for i in 1..k {
            conds.push(vec![(vidx(0), 1.0), (vidx(i), -a[i])]);
        }
        for j in 0..m {
            conds.push(vec![(vidx(0), 1.0), (vidx(k + j), -a[k + j])]);
        }
        let dneg = [3.0, -4.0, 1.0].map(|c| c / (2.0 * h));
        let dpos = [-3.0, 4.0, -1.0].map(|c| c / (2.0 * h));
        for i in 0..k {
            let mut row: Vec<(usize, f64)> = (0..3).map(|q| (off[i] + nn - q, dneg[q])).collect();
            for j in 0..m {
                for q in 0..3 {
                    row.push((off[k + j] + q, -spec.b[i][j] * dpos[q]));
                }
            }
            conds.push(row);
        }
        let d2 = [2.0, -5.0, 4.0, -1.0].map(|c| c / (h * h));
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..k {
            for q in 0..4 {
                row.push((off[i] + nn - q, d2[q] / a[i]));
            }
        }
        for j in 0..m {
            for q in 0..4 {
                row.push((off[k + j] + q, -d2[q] / a[k + j]));
            }
        }
        conds.push(row);
        debug_assert_eq!(slots.len(), conds.len());
        let border: Vec<(usize, Vec<(usize, f64)>)> =
            slots.into_iter().zip(conds).collect();
        let solver = BorderedSolver::new(&mp, &border)
            .map_err(|e| Error::numeric(format!("step operator factorization failed: {e}")))?;
        Ok(Stepper {
            npts,
            solver,
            rhs: mm,
        })
    }

    /// One linear Crank–Nicolson step applied in place to the stacked fields.
    fn advance_linear(&self, fields: &mut [Vec<f64>]) {
        let n = fields.len() * self.npts;
        let mut w = vec![0.0f64; n];
        for (e, f) in fields.iter().enumerate() {
            w[e * self.npts..(e + 1) * self.npts].copy_from_slice(f);
        }
        let mut y = vec![0.0f64; n];
        self.rhs.matvec(&w, &mut y);
        self.solver.solve_in_place(&mut y);
        for (e, f) in fields.iter_mut().enumerate() {
            f.copy_from_slice(&y[e * self.npts..(e + 1) * self.npts]);
        }
    }
}

/// Explicit transport substep w <- w - dt d/dx(w^2/2), centered in the
/// interior and second-order one-sided at the edge ends.
fn transport_substep(fields: &mut [Vec<f64>], h: f64, dt: f64) {
    for f in fields.iter_mut() {
        let n = f.len() - 1;
        let g: Vec<f64> = f.iter().map(|&v| 0.5 * v * v).collect();
        let mut d = vec![0.0f64; n + 1];
        d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
        d[n] = (3.0 * g[n] - 4.0 * g[n - 1] + g[n - 2]) / (2.0 * h);
        for q in 1..n {
            d[q] = (g[q + 1] - g[q - 1]) / (2.0 * h);
        }
        for q in 0..=n {
            f[q] -= dt * d[q];
        }
    }
}

fn sumsq(fields: &[Vec<f64>]) -> f64 {
    fields
        .iter()
        .flat_map(|f| f.iter())
        .map(|&v| v * v)
        .sum()
}

/// Shared per-step driver: optional explicit transport, then the implicit
/// linear solve, then the norm-explosion guard (growth beyond 10x in one
/// step aborts with a numeric error).
fn advance_state(stepper: &Stepper, state: &mut GraphGridState, dt: f64) -> Result<()> {
    let before = sumsq(&state.fields);
    if state.nonlinear {
        transport_substep(&mut state.fields, state.h, dt);
    }
    stepper.advance_linear(&mut state.fields);
    let after = sumsq(&state.fields);
    if !after.is_finite() || (before > 0.0 && after > 100.0 * before) {
        return Err(Error::numeric(format!(
            "norm explosion at t = {:.6}: squared norm grew {:.3e} -> {:.3e} in one step; \
             reduce dt (the explicit transport term needs dt well below h/max|w|)",
            state.t, before, after
        )));
    }
    state.t += dt;
    Ok(())
}

/// Graph mirrored through the vertex: negative and positive edges swap
/// roles, coefficients are renormalized so the leading one is 1, and the
/// derivative coupling becomes the transpose.
fn mirrored_spec(spec: &StarGraphSpec) -> StarGraphSpec {
    let k = spec.k;
    let m = spec.m;
    let scale = spec.a[k];
    let mut a = Vec::with_capacity(k + m);
    for j in 0..m {
        a.push(spec.a[k + j] / scale);
    }
    for i in 0..k {
        a.push(spec.a[i] / scale);
    }
    let mut b = vec![vec![0.0; k]; m];
    for i in 0..k {
        for j in 0..m {
            b[j][i] = spec.b[i][j];
        }
    }
    StarGraphSpec { k: m, m: k, a, b }
}

/// Edge arrays mirrored through the vertex: each array reverses and the two
/// edge groups swap, matching the substitution x -> -x.
fn mirrored_fields(fields: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(fields.len());
    for f in &fields[k..] {
        out.push(f.iter().rev().copied().collect());
    }
    for f in &fields[..k] {
        out.push(f.iter().rev().copied().collect());
    }
    out
}

/// Advance the state by one step of size dt (mutating in place).
///
/// Forward steps (dt > 0) use Crank–Nicolson for the third-derivative term,
/// which is unconditionally stable with this closure (one-step operator
/// spectral radius <= 1); dt only controls accuracy. With `nonlinear` set,
/// the explicit transport substep additionally requires dt below roughly
/// h / max|w|; violations trip the 10x norm-explosion guard.
///
/// Backward steps (dt < 0) are supported for the linear flow in the unitary
/// coupling class only, via the mirror symmetry w(x, t) -> w(-x, -t): the
/// state is mirrored through the vertex, advanced forward by |dt| on the
/// mirrored graph (swapped edge groups, rescaled coefficients, transposed
/// coupling), and mirrored back. Outside that class the backward problem is
/// ill-posed (the mirrored graph needs 2m + k conditions, only 2k + m exist).
pub fn step(state: &mut GraphGridState, dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::validation(format!("dt must be nonzero (got {dt})")));
    }
    if dt > 0.0 {
        let stepper = Stepper::build(&state.spec, state.h, state.npts(), dt)?;
        return advance_state(&stepper, state, dt);
    }
    if state.nonlinear {
        return Err(Error::validation(
            "backward stepping is supported for the linear flow only",
        ));
    }
    if state.spec.coupling_class() != CouplingClass::UnitaryGroup {
        return Err(Error::validation(
            "backward stepping requires the unitary coupling class (square B with B^T B = I)",
        ));
    }
    let mspec = mirrored_spec(&state.spec).validated()?;
    let mut mirrored = GraphGridState {
        spec: mspec,
        l: state.l,
        h: state.h,
        fields: mirrored_fields(&state.fields, state.spec.k),
        t: -state.t,
        nonlinear: false,
        far_tolerance: state.far_tolerance,
    };
    let stepper = Stepper::build(&mirrored.spec, mirrored.h, mirrored.npts(), -dt)?;
    advance_state(&stepper, &mut mirrored, -dt)?;
    state.fields = mirrored_fields(&mirrored.fields, state.spec.m);
    state.t += dt;
    Ok(())
}

/// One diagnostics row of a run.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub t: f64,
    pub l2_edges: Vec<f64>,
    pub l2_total: f64,
    pub r_value: f64,
    pub r_deriv: f64,
    pub r_second: f64,
}

/// Result of a run: sampled diagnostics (the initial snapshot first), the
/// final state, and the far-end truncation diagnostic.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub samples: Vec<SamplePoint>,
    pub state: GraphGridState,
    /// largest observed far-end amplitude as a fraction of the initial
    /// amplitude (0 when the initial data is identically zero)
    pub max_far_fraction: f64,
    /// whether max_far_fraction exceeded the state's stored tolerance;
    /// advisory only, runs are never aborted for it
    pub far_exceeded: bool,
}

fn snapshot(state: &GraphGridState) -> SamplePoint {
    let l2_edges = state.l2_edges();
    let l2_total = l2_edges.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (r_value, r_deriv, r_second) = vertex_residual(state);
    SamplePoint {
        t: state.t,
        l2_edges,
        l2_total,
        r_value,
        r_deriv,
        r_second,
    }
}

/// Run a simulation from resampled initial data to time T with fixed step
/// dt, sampling diagnostics every `sample_every` steps (and always at the
/// final step). T = 0 yields the initial snapshot only. The initial data's
/// vertex-trace compatibility is checked when its trace_tolerance is finite
/// (the smooth regularity classes require compatible traces; set it to
/// infinity to skip). Deterministic: identical inputs give identical output.
pub fn run(
    spec: &StarGraphSpec,
    initial: &InitialData,
    t_final: f64,
    dt: f64,
    h: f64,
    nonlinear: bool,
    sample_every: usize,
) -> Result<RunOutput> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::validation(format!(
            "final time must be nonnegative (got {t_final})"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation(format!(
            "run requires a positive dt (got {dt}); backward evolution goes through step()"
        )));
    }
    if sample_every == 0 {
        return Err(Error::validation("sample_every must be at least 1"));
    }
    if initial.trace_tolerance.is_finite() {
        initial.check_compatibility(spec)?;
    }
    let mut state = GraphGridState::from_initial(spec, initial, h, nonlinear)?;
    let amp0 = state.amplitude();
    let steps = (t_final / dt).round() as usize;
    let mut samples = vec![snapshot(&state)];
    let mut max_far = if amp0 > 0.0 {
        state.far_amplitude() / amp0
    } else {
        0.0
    };
    if steps > 0 {
        let stepper = Stepper::build(&state.spec, state.h, state.npts(), dt)?;
        for it in 0..steps {
            advance_state(&stepper, &mut state, dt)?;
            if (it + 1) % sample_every == 0 || it + 1 == steps {
                samples.push(snapshot(&state));
                if amp0 > 0.0 {
                    max_far = max_far.max(state.far_amplitude() / amp0);
                }
            }
        }
    }
    let far_exceeded = max_far > state.far_tolerance;
    Ok(RunOutput {
        samples,
        state,
        max_far_fraction: max_far,
        far_exceeded,
    })
}
