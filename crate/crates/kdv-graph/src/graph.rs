//! Star-graph topology and coupling data: k negative half-lines and m
//! positive half-lines meeting at one vertex, boundary scaling coefficients
//! a, and the k x m first-derivative coupling matrix B. Validates the
//! algebraic conditions under which the flow generates a unitary group or a
//! contraction semigroup.

use crate::error::{Error, Result};
use crate::linalg::sigma_max;
use crate::signal::SampledSignal;
use serde::{Deserialize, Serialize};

/// Star-graph coupling configuration. JSON schema:
/// `{"k": int, "m": int, "a": [float...], "B": [[float...]...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarGraphSpec {
    /// number of negative half-line edges
    pub k: usize,
    /// number of positive half-line edges
    pub m: usize,
    /// boundary scaling coefficients a_1..a_{k+m}; a_1 = 1, all nonzero
    pub a: Vec<f64>,
    /// k x m first-derivative coupling matrix
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

/// A single failed validation rule; violations are data, not errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// which field broke the rule, e.g. "a_2"
    pub field: String,
    /// the rule that failed, human-readable
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Semigroup classification of the coupling matrix per the generation
/// dichotomy: unitary group iff B is square orthogonal; contraction
/// semigroup iff its operator norm is at most 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingClass {
    UnitaryGroup,
    ContractionSemigroup,
    OutsideTheory,
}

impl std::fmt::Display for CouplingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CouplingClass::UnitaryGroup => "unitary-group",
            CouplingClass::ContractionSemigroup => "contraction-semigroup",
            CouplingClass::OutsideTheory => "outside-theory",
        })
    }
}

/// Entrywise tolerance for B^T B = I and for sigma_max(B) <= 1.
pub const COUPLING_TOL: f64 = 1e-10;

impl StarGraphSpec {
    pub fn from_json_str(s: &str) -> Result<StarGraphSpec> {
        serde_json::from_str(s)
            .map_err(|e| Error::validation(format!("bad graph config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph config serializes")
    }

    /// Total edge count k + m.
    pub fn edges(&self) -> usize {
        self.k + self.m
    }

    /// All invariant checks; empty iff the configuration is usable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.k < 1 {
            out.push(Violation {
                field: "k".into(),
                rule: "at least one negative half-line edge required (k >= 1)".into(),
            });
        }
        if self.m < 1 {
            out.push(Violation {
                field: "m".into(),
                rule: "at least one positive half-line edge required (m >= 1)".into(),
            });
        }
        if self.a.len() != self.k + self.m {
            out.push(Violation {
                field: "a".into(),
                rule: format!(
                    "expected k+m = {} coefficients, got {}",
                    self.k + self.m,
                    self.a.len()
                ),
            });
        }
        for (i, &ai) in self.a.iter().enumerate() {
            if ai == 0.0 || !ai.is_finite() {
                out.push(Violation {
                    field: format!("a_{}", i + 1),
                    rule: format!("boundary coefficients must be nonzero and finite, got {ai}"),
                });
            }
        }
        if let Some(&a1) = self.a.first() {
            if a1 != 1.0 && a1 != 0.0 && a1.is_finite() {
                out.push(Violation {
                    field: "a_1".into(),
                    rule: format!("normalization requires a_1 = 1 exactly, got {a1}"),
                });
            }
        }
        if self.b.len() != self.k {
            out.push(Violation {
                field: "B".into(),
                rule: format!("expected k = {} rows, got {}", self.k, self.b.len()),
            });
        }
        for (i, row) in self.b.iter().enumerate() {
            if row.len() != self.m {
                out.push(Violation {
                    field: format!("B row {}", i + 1),
                    rule: format!("expected m = {} columns, got {}", self.m, row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    out.push(Violation {
                        field: format!("B[{},{}]", i + 1, j + 1),
                        rule: format!("entries must be finite, got {v}"),
                    });
                }
            }
        }
        out
    }

    /// Like `validate`, but as a hard error listing every violation.
    pub fn validated(self) -> Result<StarGraphSpec> {
        let violations = self.validate();
        if violations.is_empty() {
            return Ok(self);
        }
        let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        Err(Error::validation(lines.join("; ")))
    }

    pub fn coupling_class(&self) -> CouplingClass {
        coupling_class(&self.b)
    }
}

fn flatten(b: &[Vec<f64>]) -> (Vec<f64>, usize, usize) {
    let rows = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut flat = Vec::with_capacity(rows * cols);
    for row in b {
        assert_eq!(row.len(), cols, "ragged coupling matrix");
        flat.extend_from_slice(row);
    }
    (flat, rows, cols)
}

/// Largest singular value of B (relative accuracy better than 1e-10).
pub fn operator_norm(b: &[Vec<f64>]) -> f64 {
    let (flat, rows, cols) = flatten(b);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    sigma_max(&flat, rows, cols)
}

/// Generation dichotomy: unitary-group iff B square with B^T B = I within
/// 1e-10 entrywise; contraction-semigroup iff sigma_max(B) <= 1 + 1e-10;
/// outside-theory otherwise.
pub fn coupling_class(b: &[Vec<f64>]) -> CouplingClass {
    let (flat, rows, cols) = flatten(b);
    if rows == cols && rows > 0 {
        let mut orthogonal = true;
        'outer: for i in 0..cols {
            for j in 0..cols {
                let mut acc = 0.0;
                for t in 0..rows {
                    acc += flat[t * cols + i] * flat[t * cols + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                if (acc - want).abs() > COUPLING_TOL {
                    orthogonal = false;
                    break 'outer;
                }
            }
        }
        if orthogonal {
            return CouplingClass::UnitaryGroup;
        }
    }
    if operator_norm(b) <= 1.0 + COUPLING_TOL {
        CouplingClass::ContractionSemigroup
    } else {
        CouplingClass::OutsideTheory
    }
}

/// Initial profiles for a truncated-graph simulation: k spatial signals on
/// (-L, 0] (sampled left to right) and m on [0, L).
#[derive(Clone, Debug)]
pub struct InitialData {
    pub u0: Vec<SampledSignal>,
    pub v0: Vec<SampledSignal>,
    /// allowed mismatch in the vertex trace equalities when compatibility
    /// checking is requested
    pub trace_tolerance: f64,
}

impl InitialData {
    /// Vertex-trace compatibility: u_1(0) = a_i u_i(0) = a_{k+j} v_j(0)
    /// within trace_tolerance. Required for initial data in the smooth
    /// regularity class (s > 1/2).
    pub fn check_compatibility(&self, spec: &StarGraphSpec) -> Result<()> {
        if self.u0.len() != spec.k || self.v0.len() != spec.m {
            return Err(Error::validation(format!(
                "initial data has {}+{} edge profiles, graph has {}+{}",
                self.u0.len(),
                self.v0.len(),
                spec.k,
                spec.m
            )));
        }
        let trace0 = self.u0[0]
            .values
            .last()
            .copied()
            .unwrap_or_default()
            .re;
        for (i, f) in self.u0.iter().enumerate() {
            let ui = f.values.last().copied().unwrap_or_default().re;
            if (trace0 - spec.a[i] * ui).abs() > self.trace_tolerance {
                return Err(Error::validation(format!(
                    "incompatible initial data: |u_1(0) - a_{} u_{}(0)| = {:e} > {:e}",
                    i + 1,
                    i + 1,
                    (trace0 - spec.a[i] * ui).abs(),
                    self.trace_tolerance
                )));
            }
        }
        for (j, f) in self.v0.iter().enumerate() {
            let vj = f.values.first().copied().unwrap_or_default().re;
            if (trace0 - spec.a[spec.k + j] * vj).abs() > self.trace_tolerance {
                return Err(Error::validation(format!(
                    "incompatible initial data: |u_1(0) - a_{} v_{}(0)| = {:e} > {:e}",
                    spec.k + j + 1,
                    j + 1,
                    (trace0 - spec.a[spec.k + j] * vj).abs(),
                    self.trace_tolerance
                )));
            }
        }
        Ok(())
    }
}
