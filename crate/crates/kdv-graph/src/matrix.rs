//! The (2k+m) x (2k+m) complex vertex coupling matrix M(lambda, beta) whose
//! invertibility decides solvability of the vertex system, plus determinant,
//! invertibility analysis, and batch sweeps over graph sizes.
//!
//! Row blocks mirror the three vertex condition groups: k+m-1 value rows,
//! k first-derivative rows, one second-derivative row. Column pairs
//! (2i, 2i+1) belong to negative edge i (two spectral parameters per edge),
//! column 2k+j to positive edge j (one parameter).

use crate::error::{Error, Result};
use crate::graph::StarGraphSpec;
use crate::linalg::DenseLuC;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Spectral parameters: two per negative edge, one per positive edge.
#[derive(Clone, Debug)]
pub struct SpectralParams {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub beta: Vec<f64>,
}

impl SpectralParams {
    /// Same parameter on every edge.
    pub fn uniform(k: usize, m: usize, lambda1: f64, lambda2: f64, beta: f64) -> SpectralParams {
        SpectralParams {
            lambda1: vec![lambda1; k],
            lambda2: vec![lambda2; k],
            beta: vec![beta; m],
        }
    }

    pub fn validate_for(&self, spec: &StarGraphSpec) -> Result<()> {
        if self.lambda1.len() != spec.k
            || self.lambda2.len() != spec.k
            || self.beta.len() != spec.m
        {
            return Err(Error::validation(format!(
                "spectral parameters need k={} lambda1, k={} lambda2, m={} beta entries; \
                 got {}, {}, {}",
                spec.k,
                spec.k,
                spec.m,
                self.lambda1.len(),
                self.lambda2.len(),
                self.beta.len()
            )));
        }
        Ok(())
    }
}

// Negative-edge terms: trace factors of the half-line solution classes for
// the value, first-derivative, and second-derivative rows.
pub fn term_rho(lambda: f64) -> f64 {
    2.0 * (PI * lambda / 3.0 + PI / 6.0).sin()
}

pub fn term_rho_tilde(lambda: f64) -> f64 {
    2.0 * (PI * lambda / 3.0 - PI / 6.0).sin()
}

pub fn term_rho_tilde2(lambda: f64) -> f64 {
    2.0 * (PI * lambda / 3.0 - PI / 2.0).sin()
}

// Positive-edge terms: unit-modulus phases.
pub fn term_d(beta: f64) -> Complex64 {
    Complex64::new(0.0, PI * beta).exp()
}

pub fn term_d_tilde(beta: f64) -> Complex64 {
    Complex64::new(0.0, PI * (beta - 1.0)).exp()
}

pub fn term_d_tilde2(beta: f64) -> Complex64 {
    Complex64::new(0.0, PI * (beta - 2.0)).exp()
}

/// Assembled vertex matrix with the inputs that produced it.
#[derive(Clone, Debug)]
pub struct VertexMatrix {
    pub n: usize,
    /// row-major n x n
    pub entries: Vec<Complex64>,
    pub graph: StarGraphSpec,
    pub params: SpectralParams,
}

impl VertexMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }
}

/// Build M from a validated graph and matching spectral parameters.
///
/// With rows/columns 0-based and n = 2k+m, the nonzero pattern is:
/// value rows r = 0..k+m-2 carry rho(lambda_{0,1}), rho(lambda_{0,2}) in
/// columns 0, 1; value row i-1 (1 <= i < k) also carries
/// -a_i rho(lambda_{i,l}) in columns 2i, 2i+1; value row k-1+j carries
/// -a_{k+j} d(beta_j) in column 2k+j. Derivative row k+m-1+i carries
/// -rho~(lambda_{i,l}) in columns 2i, 2i+1 and b_{ij} d~(beta_j) in column
/// 2k+j. The last row carries rho~~(lambda_{i,l})/a_i in columns 2i, 2i+1
/// and -d~~(beta_j)/a_{k+j} in column 2k+j.
pub fn assemble(spec: &StarGraphSpec, params: &SpectralParams) -> Result<VertexMatrix> {
    let violations = spec.validate();
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::validation(lines.join("; ")));
    }
    params.validate_for(spec)?;
    let (k, m) = (spec.k, spec.m);
    let n = 2 * k + m;
    let mut e = vec![Complex64::new(0.0, 0.0); n * n];
    let re = |x: f64| Complex64::new(x, 0.0);

    // value rows 0..k+m-2: edge-0 terms in columns 0, 1
    for r in 0..k + m - 1 {
        e[r * n] = re(term_rho(params.lambda1[0]));
        e[r * n + 1] = re(term_rho(params.lambda2[0]));
    }
    // value rows for the remaining negative edges
    for i in 1..k {
        let r = i - 1;
        e[r * n + 2 * i] = re(-spec.a[i] * term_rho(params.lambda1[i]));
        e[r * n + 2 * i + 1] = re(-spec.a[i] * term_rho(params.lambda2[i]));
    }
    // value rows for positive edges
    for j in 0..m {
        let r = k - 1 + j;
        e[r * n + 2 * k + j] = -spec.a[k + j] * term_d(params.beta[j]);
    }
    // first-derivative rows
    for i in 0..k {
        let r = k + m - 1 + i;
        e[r * n + 2 * i] = re(-term_rho_tilde(params.lambda1[i]));
        e[r * n + 2 * i + 1] = re(-term_rho_tilde(params.lambda2[i]));
        for j in 0..m {
            e[r * n + 2 * k + j] = spec.b[i][j] * term_d_tilde(params.beta[j]);
        }
    }
    // second-derivative row
    {
        let r = 2 * k + m - 1;
        for i in 0..k {
            e[r * n + 2 * i] = re(term_rho_tilde2(params.lambda1[i]) / spec.a[i]);
            e[r * n + 2 * i + 1] = re(term_rho_tilde2(params.lambda2[i]) / spec.a[i]);
        }
        for j in 0..m {
            e[r * n + 2 * k + j] = -term_d_tilde2(params.beta[j]) / spec.a[k + j];
        }
    }
    Ok(VertexMatrix {
        n,
        entries: e,
        graph: spec.clone(),
        params: params.clone(),
    })
}

/// Determinant via complex LU with partial pivoting.
pub fn determinant(m: &VertexMatrix) -> Complex64 {
    DenseLuC::factor(&m.entries, m.n).det()
}

pub const DEFAULT_DET_TOL: f64 = 1e-9;
pub const DEFAULT_COND_CAP: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct Invertibility {
    pub det: Complex64,
    pub abs_det: f64,
    pub condition_estimate: f64,
    pub invertible: bool,
}

/// Invertibility thresholding: |det| above det_tol and the 1-norm condition
/// estimate below cond_cap.
pub fn invertibility(m: &VertexMatrix, det_tol: f64, cond_cap: f64) -> Invertibility {
    let lu = DenseLuC::factor(&m.entries, m.n);
    let det = lu.det();
    let abs_det = det.norm();
    let condition_estimate = lu.cond_1norm_estimate();
    Invertibility {
        det,
        abs_det,
        condition_estimate,
        invertible: abs_det > det_tol && condition_estimate < cond_cap,
    }
}

/// Graph families for batch sweeps over (k, m).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepFamily {
    /// a = 1 on every edge, B = I_k; defined for k = m only.
    Balanced,
    /// a = 1 on every edge, B with every entry (k m)^{-1/4}, the rank-one
    /// unit-norm coupling that matches the published determinant values
    /// for unbalanced graphs.
    Uniform,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub k: usize,
    pub m: usize,
    pub det: Complex64,
    pub abs_det: f64,
    pub invertible: bool,
    /// set when this member failed to assemble; det fields are zero then
    pub error: Option<String>,
}

/// Build the family member for one (k, m) pair.
pub fn family_graph(family: SweepFamily, k: usize, m: usize) -> Result<StarGraphSpec> {
    match family {
        SweepFamily::Balanced => {
            if k != m {
                return Err(Error::validation(format!(
                    "balanced family requires k = m, got ({k}, {m})"
                )));
            }
            let b = (0..k)
                .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            StarGraphSpec {
                k,
                m,
                a: vec![1.0; k + m],
                b,
            }
            .validated()
        }
        SweepFamily::Uniform => {
            let e = ((k * m) as f64).powf(-0.25);
            StarGraphSpec {
                k,
                m,
                a: vec![1.0; k + m],
                b: vec![vec![e; m]; k],
            }
            .validated()
        }
    }
}

/// Evaluate det M over a family; one row per (k, m), errors recorded per
/// row without aborting the sweep.
pub fn sweep(
    family: SweepFamily,
    pairs: &[(usize, usize)],
    lambda1: f64,
    lambda2: f64,
    beta: f64,
    det_tol: f64,
    cond_cap: f64,
) -> Vec<SweepRow> {
    pairs
        .iter()
        .map(|&(k, m)| {
            let built = family_graph(family, k, m).and_then(|g| {
                let p = SpectralParams::uniform(k, m, lambda1, lambda2, beta);
                assemble(&g, &p)
            });
            match built {
                Ok(vm) => {
                    let inv = invertibility(&vm, det_tol, cond_cap);
                    SweepRow {
                        k,
                        m,
                        det: inv.det,
                        abs_det: inv.abs_det,
                        invertible: inv.invertible,
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    k,
                    m,
                    det: Complex64::new(0.0, 0.0),
                    abs_det: 0.0,
                    invertible: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y_junction() -> (StarGraphSpec, SpectralParams) {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let g = StarGraphSpec {
            k: 1,
            m: 2,
            a: vec![1.0, 1.0, 1.0],
            b: vec![vec![s2, s2]],
        };
        let p = SpectralParams {
            lambda1: vec![0.44],
            lambda2: vec![0.22],
            beta: vec![0.44, 0.44],
        };
        (g, p)
    }

    #[test]
    fn term_reference_values() {
        // frozen against high-precision evaluation of the defining formulas
        assert!((term_rho(0.44) - 1.6658424814201990).abs() < 1e-14);
        assert!((term_rho_tilde(0.44) - -0.12558103905862675).abs() < 1e-14);
        assert!((term_rho_tilde2(0.44) - -1.7914235204788257).abs() < 1e-14);
        assert!((term_rho(0.22) - 1.3690942118573773).abs() < 1e-14);
        assert!((term_rho_tilde(0.22) - -0.57806359388894318).abs() < 1e-14);
        assert!((term_rho_tilde2(0.22) - -1.9471578057463205).abs() < 1e-14);
        let d = term_d(0.44);
        assert!((d.re - 0.18738131458572463).abs() < 1e-14);
        assert!((d.im - 0.98228725072868868).abs() < 1e-14);
        // term_d(0.5) = i
        let di = term_d(0.5);
        assert!(di.re.abs() < 1e-15 && (di.im - 1.0).abs() < 1e-15);
        // phase shifts: d~ = -d and d~~ = d, each from its own formula
        for beta in [0.1, 0.44, 0.49] {
            assert!((term_d_tilde(beta) + term_d(beta)).norm() < 1e-14);
            assert!((term_d_tilde2(beta) - term_d(beta)).norm() < 1e-14);
        }
    }

    #[test]
    fn worked_example_determinants() {
        // Y-junction
        let (g, p) = y_junction();
        let det = determinant(&assemble(&g, &p).unwrap());
        assert!(
            (det.re - -3.2466).abs() < 1e-4 && (det.im - 1.2854).abs() < 1e-4,
            "Y-junction det = {det}"
        );
        // k=3, m=5, uniform coupling
        let g = family_graph(SweepFamily::Uniform, 3, 5).unwrap();
        let p = SpectralParams::uniform(3, 5, 0.44, 0.22, 0.44);
        let det = determinant(&assemble(&g, &p).unwrap());
        assert!(
            (det.re - 6.2557).abs() < 1e-4 && (det.im - 4.5450).abs() < 1e-4,
            "k=3 m=5 det = {det}"
        );
    }

    #[test]
    fn balanced_family_endpoints() {
        for (n, want) in [(1usize, 2.37309), (51, 0.00098)] {
            let g = family_graph(SweepFamily::Balanced, n, n).unwrap();
            let p = SpectralParams::uniform(n, n, 0.44, 0.22, 0.44);
            let vm = assemble(&g, &p).unwrap();
            let inv = invertibility(&vm, DEFAULT_DET_TOL, DEFAULT_COND_CAP);
            assert!(
                (inv.abs_det - want).abs() < 1e-4,
                "k=m={n}: |det| = {}",
                inv.abs_det
            );
            assert!(inv.invertible);
        }
    }

    #[test]
    fn zero_pattern() {
        let g = StarGraphSpec {
            k: 2,
            m: 3,
            a: vec![1.0, -0.5, 2.0, 1.5, 0.25],
            b: vec![vec![0.1, 0.2, 0.3], vec![-0.4, 0.5, -0.6]],
        };
        let p = SpectralParams {
            lambda1: vec![0.44, 0.31],
            lambda2: vec![0.22, 0.17],
            beta: vec![0.44, 0.40, 0.09],
        };
        let vm = assemble(&g, &p).unwrap();
        let (k, m, n) = (2usize, 3usize, 7usize);
        assert_eq!(vm.n, n);
        for r in 0..n {
            for c in 0..n {
                let nonzero = vm.get(r, c).norm() > 0.0;
                let expect = if r < k + m - 1 {
                    // value rows: edge-0 pair, own negative pair, or own
                    // positive column
                    c < 2
                        || (r + 1 < k && (c == 2 * (r + 1) || c == 2 * (r + 1) + 1))
                        || (r >= k - 1 && c == 2 * k + (r - (k - 1)))
                } else if r < 2 * k + m - 1 {
                    let i = r - (k + m - 1);
                    c == 2 * i || c == 2 * i + 1 || c >= 2 * k
                } else {
                    true // last row is fully populated
                };
                assert_eq!(
                    nonzero, expect,
                    "entry ({r},{c}) = {} breaks the pattern",
                    vm.get(r, c)
                );
            }
        }
    }

    #[test]
    fn determinant_continuity_in_parameters() {
        let (g, p) = y_junction();
        let base = determinant(&assemble(&g, &p).unwrap());
        let mut p2 = p.clone();
        p2.lambda1[0] += 1e-8;
        let mut p3 = p.clone();
        p3.beta[1] += 1e-8;
        for pp in [p2, p3] {
            let d = determinant(&assemble(&g, &pp).unwrap());
            assert!((d - base).norm() < 1e-5);
        }
    }

    #[test]
    fn sweep_marks_errors_without_aborting() {
        let rows = sweep(
            SweepFamily::Balanced,
            &[(1, 1), (2, 3), (2, 2)],
            0.44,
            0.22,
            0.44,
            DEFAULT_DET_TOL,
            DEFAULT_COND_CAP,
        );
        assert_eq!(rows.len(), 3);
        assert!(rows[0].error.is_none() && rows[0].invertible);
        assert!(rows[1].error.is_some());
        assert!(rows[2].error.is_none() && rows[2].invertible);
    }

    #[test]
    fn empty_sweep_is_empty() {
        assert!(sweep(
            SweepFamily::Uniform,
            &[],
            0.44,
            0.22,
            0.44,
            DEFAULT_DET_TOL,
            DEFAULT_COND_CAP
        )
        .is_empty());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (g, _) = y_junction();
        let bad = SpectralParams::uniform(2, 2, 0.44, 0.22, 0.44);
        assert!(assemble(&g, &bad).is_err());
    }

    #[test]
    fn invalid_graph_rejected_by_assemble() {
        let g = StarGraphSpec {
            k: 1,
            m: 1,
            a: vec![1.0, 0.0],
            b: vec![vec![1.0]],
        };
        let p = SpectralParams::uniform(1, 1, 0.44, 0.22, 0.44);
        assert!(assemble(&g, &p).is_err());
    }
}
