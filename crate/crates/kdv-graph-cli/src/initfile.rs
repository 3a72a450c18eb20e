//! Initial-condition file for `simulate`: per-edge profiles as sums of
//! Gaussians on a shared truncation length, sampled onto the run grid.
//!
//! Schema:
//! `{"L": 20.0, "edges": [[{"center": 0.0, "sigma": 1.5, "amplitude": 1.0},
//! ...], ...], "trace_tolerance": 1e-8}` with one component list per edge,
//! negative edges first. `trace_tolerance` omitted disables the vertex
//! compatibility check.

use kdv_graph::graph::InitialData;
use kdv_graph::signal::SampledSignal;
use kdv_graph::{Error, Result};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitFile {
    #[serde(rename = "L")]
    pub l: f64,
    pub edges: Vec<Vec<Gaussian>>,
    pub trace_tolerance: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub center: f64,
    pub sigma: f64,
    pub amplitude: f64,
}

impl Gaussian {
    fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

impl InitFile {
    pub fn parse(text: &str) -> Result<InitFile> {
        let f: InitFile = serde_json::from_str(text)
            .map_err(|e| Error::validation(format!("bad init file: {e}")))?;
        if !(f.l.is_finite() && f.l > 0.0) {
            return Err(Error::validation(format!(
                "init file needs a positive truncation length L, got {}",
                f.l
            )));
        }
        if let Some(t) = f.trace_tolerance {
            if !(t >= 0.0) {
                return Err(Error::validation(format!(
                    "trace_tolerance must be nonnegative, got {t}"
                )));
            }
        }
        for (i, comps) in f.edges.iter().enumerate() {
            for g in comps {
                if !(g.sigma.is_finite() && g.sigma > 0.0) {
                    return Err(Error::validation(format!(
                        "edge {} has a Gaussian with sigma {}, need a positive width",
                        i + 1,
                        g.sigma
                    )));
                }
                if !g.center.is_finite() || !g.amplitude.is_finite() {
                    return Err(Error::validation(format!(
                        "edge {} has a Gaussian with non-finite center or amplitude",
                        i + 1
                    )));
                }
            }
        }
        Ok(f)
    }

    /// Sample the profiles on the run grid: the first k edges on [-L, 0],
    /// the remaining m on [0, L].
    pub fn build(&self, k: usize, m: usize, h: f64) -> Result<InitialData> {
        if self.edges.len() != k + m {
            return Err(Error::validation(format!(
                "init file has {} edge profiles, graph has k+m = {}",
                self.edges.len(),
                k + m
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::validation(format!(
                "grid step must be positive, got {h}"
            )));
        }
        let n = (self.l / h).round() as usize;
        if n < 5 {
            return Err(Error::validation(format!(
                "truncation length {} gives only {} grid cells at h = {}",
                self.l, n, h
            )));
        }
        let profile = |comps: &[Gaussian], x: f64| comps.iter().map(|g| g.eval(x)).sum::<f64>();
        let mut u0 = Vec::with_capacity(k);
        for e in 0..k {
            let vals: Vec<f64> = (0..=n)
                .map(|q| profile(&self.edges[e], -self.l + q as f64 * h))
                .collect();
            u0.push(SampledSignal::from_real(-self.l, h, &vals, false)?);
        }
        let mut v0 = Vec::with_capacity(m);
        for e in 0..m {
            let vals: Vec<f64> = (0..=n)
                .map(|q| profile(&self.edges[k + e], q as f64 * h))
                .collect();
            v0.push(SampledSignal::from_real(0.0, h, &vals, true)?);
        }
        Ok(InitialData {
            u0,
            v0,
            trace_tolerance: self.trace_tolerance.unwrap_or(f64::INFINITY),
        })
    }
}
