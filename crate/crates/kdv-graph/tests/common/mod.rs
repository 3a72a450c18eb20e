//! Shared helpers for integration tests: an independent, loop-structured
//! transcription of the vertex-matrix assembly (kept deliberately separate
//! from the production routine so the two can be compared entry by entry)
//! and a seeded random-configuration generator.
#![allow(dead_code)]

use kdv_graph::graph::StarGraphSpec;
use kdv_graph::matrix::SpectralParams;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Reference assembly of the (2k+m) x (2k+m) vertex matrix, written
/// directly from the condition-by-condition layout with its own inline
/// formulas. Row blocks: k+m-1 value rows, k derivative rows, one
/// second-derivative row. Column layout: (2i, 2i+1) for the two spectral
/// exponents of negative edge i, then 2k+j for positive edge j.
pub fn reference_vertex_matrix(
    spec: &StarGraphSpec,
    params: &SpectralParams,
) -> Vec<Vec<Complex64>> {
    let k = spec.k;
    let m = spec.m;
    let n = 2 * k + m;
    let a = &spec.a;
    let b = &spec.b;
    let l1 = &params.lambda1;
    let l2 = &params.lambda2;
    let beta = &params.beta;
    let zero = Complex64::new(0.0, 0.0);
    let mut mat = vec![vec![zero; n]; n];

    let sin_term = |lam: f64, shift: f64| 2.0 * (PI * lam / 3.0 + shift).sin();
    let phase = |arg: f64| Complex64::new(0.0, PI * arg).exp();

    // value rows: u_1 vs u_i (rows 0..k-2), u_1 vs v_j (rows k-1..k+m-2)
    for r in 0..k + m - 1 {
        mat[r][0] = Complex64::new(sin_term(l1[0], PI / 6.0), 0.0);
        mat[r][1] = Complex64::new(sin_term(l2[0], PI / 6.0), 0.0);
        if r < k - 1 {
            let i = r + 1;
            mat[r][2 * i] = Complex64::new(-a[i] * sin_term(l1[i], PI / 6.0), 0.0);
            mat[r][2 * i + 1] = Complex64::new(-a[i] * sin_term(l2[i], PI / 6.0), 0.0);
        } else {
            let j = r - (k - 1);
            mat[r][2 * k + j] = -a[k + j] * phase(beta[j]);
        }
    }
    // derivative rows: one per negative edge, coupling all positive edges
    for i in 0..k {
        let r = k + m - 1 + i;
        mat[r][2 * i] = Complex64::new(-sin_term(l1[i], -PI / 6.0), 0.0);
        mat[r][2 * i + 1] = Complex64::new(-sin_term(l2[i], -PI / 6.0), 0.0);
        for j in 0..m {
            mat[r][2 * k + j] = b[i][j] * phase(beta[j] - 1.0);
        }
    }
    // second-derivative balance row
    let r = 2 * k + m - 1;
    for i in 0..k {
        mat[r][2 * i] = Complex64::new(sin_term(l1[i], -PI / 2.0) / a[i], 0.0);
        mat[r][2 * i + 1] = Complex64::new(sin_term(l2[i], -PI / 2.0) / a[i], 0.0);
    }
    for j in 0..m {
        mat[r][2 * k + j] = -phase(beta[j] - 2.0) / a[k + j];
    }
    mat
}

/// Random valid graph + per-edge spectral parameters: k, m in 1..=kmax,
/// a_1 = 1 with the rest bounded away from zero, unconstrained coupling
/// entries, exponents and phases inside (0, 1/2).
pub fn random_config(rng: &mut ChaCha8Rng, kmax: usize) -> (StarGraphSpec, SpectralParams) {
    let k = rng.gen_range(1..=kmax);
    let m = rng.gen_range(1..=kmax);
    let mut a = vec![1.0f64];
    for _ in 1..k + m {
        let mag = rng.gen_range(0.3..2.0);
        let sgn = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        a.push(sgn * mag);
    }
    let b: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..m).map(|_| rng.gen_range(-1.5..1.5)).collect())
        .collect();
    let spec = StarGraphSpec { k, m, a, b }.validated().unwrap();
    let params = SpectralParams {
        lambda1: (0..k).map(|_| rng.gen_range(0.01..0.49)).collect(),
        lambda2: (0..k).map(|_| rng.gen_range(0.01..0.49)).collect(),
        beta: (0..m).map(|_| rng.gen_range(0.01..0.49)).collect(),
    };
    (spec, params)
}

/// Whether position (r, c) belongs to the documented nonzero pattern.
pub fn in_pattern(k: usize, m: usize, r: usize, c: usize) -> bool {
    if r < k + m - 1 {
        if c <= 1 {
            return true;
        }
        if r < k - 1 {
            let i = r + 1;
            c == 2 * i || c == 2 * i + 1
        } else {
            c == 2 * k + (r - (k - 1))
        }
    } else if r < 2 * k + m - 1 {
        let i = r - (k + m - 1);
        c == 2 * i || c == 2 * i + 1 || c >= 2 * k
    } else {
        true
    }
}
