//! Admissible Sobolev regularity: for spectral parameters p the exponent s
//! must satisfy max{s-1, 0} < p < min{s+1/2, 1/2} on every edge, with
//! s in (-1/2, 3/2) and s != 1/2. Solving those strict inequalities for s
//! gives an open interval; this module computes it, tests membership, and
//! searches the parameter box for invertible configurations at a given s.

use crate::error::{Error, Result};
use crate::graph::StarGraphSpec;
use crate::matrix::{assemble, invertibility, SpectralParams};
use num_complex::Complex64;
use std::fmt;

/// Open interval (lo, hi) minus {1/2}, already intersected with (-1/2, 3/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityInterval {
    pub lo: f64,
    pub hi: f64,
    pub excludes_half: bool,
    pub empty: bool,
}

impl RegularityInterval {
    pub fn empty_interval() -> RegularityInterval {
        RegularityInterval {
            lo: 0.0,
            hi: 0.0,
            excludes_half: true,
            empty: true,
        }
    }

    /// Strict open membership; 1/2 is never a member.
    pub fn contains(&self, s: f64) -> bool {
        !self.empty && self.lo < s && s < self.hi && s != 0.5
    }
}

/// Fixed-precision print then trim, so reported endpoints read as the
/// decimals they were derived from (e.g. -0.06, not a 17-digit float).
fn fmt_trim(x: f64) -> String {
    let mut s = format!("{:.12}", x);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

impl fmt::Display for RegularityInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            write!(f, "empty")
        } else {
            write!(f, "({}, {}) \\ {{0.5}}", fmt_trim(self.lo), fmt_trim(self.hi))
        }
    }
}

fn param_entries(params: &SpectralParams) -> Vec<f64> {
    let mut p = params.lambda1.clone();
    p.extend_from_slice(&params.lambda2);
    p.extend_from_slice(&params.beta);
    p
}

/// Admissible s for a parameter set P: empty unless P is strictly inside
/// (0, 1/2); otherwise (max P - 1/2, min P + 1) intersected with
/// (-1/2, 3/2), excluding 1/2. Intersection is applied last.
pub fn admissible_s(params: &SpectralParams) -> RegularityInterval {
    let p = param_entries(params);
    if p.is_empty() || p.iter().any(|&x| !(x > 0.0 && x < 0.5)) {
        return RegularityInterval::empty_interval();
    }
    let pmax = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pmin = p.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = (pmax - 0.5).max(-0.5);
    let hi = (pmin + 1.0).min(1.5);
    if lo >= hi {
        return RegularityInterval::empty_interval();
    }
    RegularityInterval {
        lo,
        hi,
        excludes_half: true,
        empty: false,
    }
}

/// Pointwise form: every p must satisfy max{s-1, 0} < p < min{s+1/2, 1/2},
/// and s itself must lie in (-1/2, 3/2) \ {1/2}. Strict comparisons, no
/// epsilon.
pub fn admits_s(params: &SpectralParams, s: f64) -> bool {
    if !(-0.5 < s && s < 1.5) || s == 0.5 {
        return false;
    }
    let lo = (s - 1.0).max(0.0);
    let hi = (s + 0.5).min(0.5);
    let p = param_entries(params);
    !p.is_empty() && p.iter().all(|&x| lo < x && x < hi)
}

/// Tied search grid: the same ascending multiples of `step` inside
/// (lo, hi) are used for lambda1, lambda2, and beta.
#[derive(Clone, Copy, Debug)]
pub struct SearchGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub params: SpectralParams,
    pub det: Complex64,
    pub abs_det: f64,
}

/// Maximize |det M| over the tied grid, keeping only configurations that
/// admit s and pass the invertibility thresholds. Grid points are the
/// multiples of step strictly inside both the grid bounds and the
/// admissible parameter box at s. Ascending lexicographic iteration with
/// strictly-greater replacement makes the argmax deterministic
/// (lexicographically smallest winner on ties). None when no grid point
/// qualifies.
pub fn search_params(
    spec: &StarGraphSpec,
    s: f64,
    grid: &SearchGrid,
    det_tol: f64,
    cond_cap: f64,
) -> Result<Option<SearchResult>> {
    let violations = spec.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::validation(lines.join("; ")));
    }
    if !(grid.step > 0.0) || !grid.step.is_finite() {
        return Err(Error::validation(format!(
            "grid step must be positive and finite, got {}",
            grid.step
        )));
    }
    if !(grid.lo < grid.hi) || !grid.lo.is_finite() || !grid.hi.is_finite() {
        return Err(Error::validation(format!(
            "grid bounds must satisfy lo < hi, got ({}, {})",
            grid.lo, grid.hi
        )));
    }
    if !(-0.5 < s && s < 1.5) || s == 0.5 {
        return Ok(None);
    }
    // pointwise admissible box at this s, intersected with the grid bounds
    let box_lo = (s - 1.0).max(0.0).max(grid.lo);
    let box_hi = (s + 0.5).min(0.5).min(grid.hi);
    let mut values = Vec::new();
    let mut i = 1usize;
    loop {
        let v = i as f64 * grid.step;
        if v >= box_hi {
            break;
        }
        if v > box_lo {
            values.push(v);
        }
        i += 1;
    }
    let mut best: Option<SearchResult> = None;
    for &l1 in &values {
        for &l2 in &values {
            for &be in &values {
                let p = SpectralParams::uniform(spec.k, spec.m, l1, l2, be);
                let vm = assemble(spec, &p)?;
                let inv = invertibility(&vm, det_tol, cond_cap);
                if !inv.invertible {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => inv.abs_det > b.abs_det,
                };
                if better {
                    best = Some(SearchResult {
                        params: p,
                        det: inv.det,
                        abs_det: inv.abs_det,
                    });
                }
            }
        }
    }
    Ok(best)
}
