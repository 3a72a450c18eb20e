//! Dense and banded linear algebra: complex LU with determinant and a
//! 1-norm condition estimate, largest singular value via Jacobi iteration
//! on the Gram matrix, real banded LU, and a bordered solver (banded core
//! plus a few dense constraint rows, handled by the Woodbury identity).

use crate::error::{Error, Result};
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// complex dense LU

/// LU factorization with partial pivoting of a row-major n x n complex
/// matrix. Singular inputs still factor (for determinant = 0) but refuse to
/// solve.
pub struct DenseLuC {
    n: usize,
    lu: Vec<Complex64>,
    /// piv[j] = row swapped with row j at elimination step j
    piv: Vec<usize>,
    swaps: usize,
    singular: bool,
    norm1: f64,
}

impl DenseLuC {
    pub fn factor(a: &[Complex64], n: usize) -> DenseLuC {
        assert_eq!(a.len(), n * n);
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut lu = a.to_vec();
        let mut piv = vec![0usize; n];
        let mut swaps = 0usize;
        let mut singular = false;
        for j in 0..n {
            let mut p = j;
            let mut best = lu[j * n + j].norm();
            for i in j + 1..n {
                let v = lu[i * n + j].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[j] = p;
            if p != j {
                for c in 0..n {
                    lu.swap(j * n + c, p * n + c);
                }
                swaps += 1;
            }
            let pivval = lu[j * n + j];
            if pivval.norm() == 0.0 {
                singular = true;
                continue;
            }
            for i in j + 1..n {
                let mult = lu[i * n + j] / pivval;
                lu[i * n + j] = mult;
                for c in j + 1..n {
                    let t = lu[j * n + c];
                    lu[i * n + c] -= mult * t;
                }
            }
        }
        DenseLuC {
            n,
            lu,
            piv,
            swaps,
            singular,
            norm1,
        }
    }

    #[cfg(test)]
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> Complex64 {
        let mut d = Complex64::new(if self.swaps % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        for j in 0..self.n {
            d *= self.lu[j * self.n + j];
        }
        d
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.singular {
            return Err(Error::numeric("matrix is singular to working precision"));
        }
        let n = self.n;
        let mut x = b.to_vec();
        // factor stores fully pivoted rows: apply all swaps before L-solve
        for j in 0..n {
            x.swap(j, self.piv[j]);
        }
        for j in 0..n {
            let xj = x[j];
            for i in j + 1..n {
                x[i] -= self.lu[i * n + j] * xj;
            }
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for c in j + 1..n {
                acc -= self.lu[j * n + c] * x[c];
            }
            x[j] = acc / self.lu[j * n + j];
        }
        Ok(x)
    }

    /// Solve A^H x = b (conjugate transpose), used by the condition estimate.
    pub fn solve_conj_t(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.singular {
            return Err(Error::numeric("matrix is singular to working precision"));
        }
        let n = self.n;
        // A = P^T L U, so A^H = U^H L^H P: forward with U^H, back with L^H,
        // then undo the row swaps in reverse order.
        let mut x = b.to_vec();
        for j in 0..n {
            let mut acc = x[j];
            for i in 0..j {
                acc -= self.lu[i * n + j].conj() * x[i];
            }
            x[j] = acc / self.lu[j * n + j].conj();
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for i in j + 1..n {
                acc -= self.lu[i * n + j].conj() * x[i];
            }
            x[j] = acc;
        }
        for j in (0..n).rev() {
            x.swap(j, self.piv[j]);
        }
        Ok(x)
    }

    /// 1-norm condition estimate ||A||_1 * est(||A^{-1}||_1) via the
    /// Hager power method with the standard alternating-vector safeguard.
    pub fn cond_1norm_estimate(&self) -> f64 {
        if self.singular {
            return f64::INFINITY;
        }
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let one_over = Complex64::new(1.0 / n as f64, 0.0);
        let mut x = vec![one_over; n];
        let mut est = 0.0;
        for iter in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return f64::INFINITY,
            };
            est = y.iter().map(|z| z.norm()).sum::<f64>();
            let xi: Vec<Complex64> = y
                .iter()
                .map(|z| {
                    if z.norm() == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        z / z.norm()
                    }
                })
                .collect();
            let z = match self.solve_conj_t(&xi) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            let zhx: f64 = z
                .iter()
                .zip(&x)
                .map(|(zi, xi)| (zi.conj() * xi).re)
                .sum();
            if iter > 0 && zmax <= zhx {
                break;
            }
            x = vec![Complex64::new(0.0, 0.0); n];
            x[jmax] = Complex64::new(1.0, 0.0);
        }
        // safeguard vector catching smooth near-null spaces
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / ((n as f64 - 1.0).max(1.0))), 0.0)
            })
            .collect();
        if let Ok(y) = self.solve(&alt) {
            let est2 =
                2.0 * y.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
            est = est.max(est2);
        }
        self.norm1 * est
    }
}

// ---------------------------------------------------------------------------
// largest singular value

/// Largest singular value of a k x m real matrix (row-major), via cyclic
/// Jacobi diagonalization of the smaller of B^T B and B B^T.
pub fn sigma_max(b: &[f64], rows: usize, cols: usize) -> f64 {
    assert_eq!(b.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let p = rows.min(cols);
    let mut g = vec![0.0f64; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut acc = 0.0;
            if rows <= cols {
                // G = B B^T
                for t in 0..cols {
                    acc += b[i * cols + t] * b[j * cols + t];
                }
            } else {
                // G = B^T B
                for t in 0..rows {
                    acc += b[t * cols + i] * b[t * cols + j];
                }
            }
            g[i * p + j] = acc;
        }
    }
    let fro: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if fro == 0.0 {
        return 0.0;
    }
    for _sweep in 0..60 {
        let mut off = 0.0;
        for q in 1..p {
            for r in 0..q {
                off += g[r * p + q] * g[r * p + q];
            }
        }
        if off.sqrt() <= 1e-15 * fro {
            break;
        }
        for q in 1..p {
            for r in 0..q {
                let apq = g[r * p + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = g[r * p + r];
                let aqq = g[q * p + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for idx in 0..p {
                    let grow = g[r * p + idx];
                    let qrow = g[q * p + idx];
                    g[r * p + idx] = c * grow - s * qrow;
                    g[q * p + idx] = s * grow + c * qrow;
                }
                for idx in 0..p {
                    let gcol = g[idx * p + r];
                    let qcol = g[idx * p + q];
                    g[idx * p + r] = c * gcol - s * qcol;
                    g[idx * p + q] = s * gcol + c * qcol;
                }
            }
        }
    }
    let lmax = (0..p).map(|i| g[i * p + i]).fold(f64::NEG_INFINITY, f64::max);
    lmax.max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// real banded matrices

/// Real banded matrix with kl sub- and ku super-diagonals, stored by
/// diagonal for fast matvec; also the input form for banded factorization.
#[derive(Clone)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// data[(d + ku) * n + j] = entry (j + d, j), for -ku <= d <= kl
    data: Vec<f64>,
}

impl Banded {
    pub fn new(n: usize, kl: usize, ku: usize) -> Banded {
        Banded {
            n,
            kl,
            ku,
            data: vec![0.0; (kl + ku + 1) * n],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let d = i as isize - j as isize;
        if d < -(self.ku as isize) || d > self.kl as isize || i >= self.n || j >= self.n {
            return None;
        }
        Some(((d + self.ku as isize) as usize) * self.n + j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Clear an entire row (used for rows that are replaced by constraints).
    #[cfg(test)]
    pub fn zero_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.ku);
        let hi = (i + self.kl).min(self.n - 1);
        for j in lo..=hi {
            if let Some(s) = self.slot(i, j) {
                self.data[s] = 0.0;
            }
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for d in -(self.ku as isize)..=(self.kl as isize) {
            let band = &self.data[((d + self.ku as isize) as usize) * self.n..][..self.n];
            let jlo = if d < 0 { (-d) as usize } else { 0 };
            let jhi = if d > 0 {
                self.n.saturating_sub(d as usize)
            } else {
                self.n
            };
            if jlo >= jhi {
                continue;
            }
            for j in jlo..jhi {
                y[(j as isize + d) as usize] += band[j] * x[j];
            }
        }
    }
}

/// Banded LU with partial pivoting (LAPACK-style band storage with kl extra
/// fill rows).
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// column-major, ldab = 2 kl + ku + 1; entry (i, j) at
    /// ab[j * ldab + kl + ku + i - j]
    ab: Vec<f64>,
    ldab: usize,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &Banded) -> Result<BandedLu> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0f64; ldab * n];
        for j in 0..n {
            let ilo = j.saturating_sub(ku);
            let ihi = (j + kl).min(n - 1);
            for i in ilo..=ihi {
                ab[j * ldab + kl + ku + i - j] = a.get(i, j);
            }
        }
        let kuw = ku + kl; // working upper bandwidth after fill-in
        let mut piv = vec![0usize; n];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0usize;
            let mut best = ab[j * ldab + kl + ku].abs();
            for q in 1..=km {
                let v = ab[j * ldab + kl + ku + q].abs();
                if v > best {
                    best = v;
                    p = q;
                }
            }
            piv[j] = j + p;
            if best == 0.0 {
                return Err(Error::numeric(format!(
                    "banded factorization hit a zero pivot at column {j}"
                )));
            }
            if p != 0 {
                let chi = (j + kuw).min(n - 1);
                for c in j..=chi {
                    let r1 = c * ldab + kl + ku + j - c;
                    let r2 = c * ldab + kl + ku + j + p - c;
                    ab.swap(r1, r2);
                }
            }
            let pivval = ab[j * ldab + kl + ku];
            for q in 1..=km {
                ab[j * ldab + kl + ku + q] /= pivval;
            }
            let chi = (j + kuw).min(n - 1);
            for c in j + 1..=chi {
                let ujc = ab[c * ldab + kl + ku + j - c];
                if ujc != 0.0 {
                    for q in 1..=km {
                        ab[c * ldab + kl + ku + j + q - c] -=
                            ab[j * ldab + kl + ku + q] * ujc;
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            ab,
            ldab,
            piv,
        })
    }

    /// Solve A x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        for j in 0..n {
            if self.piv[j] != j {
                b.swap(j, self.piv[j]);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for q in 1..=km {
                    b[j + q] -= self.ab[j * ldab + kl + ku + q] * bj;
                }
            }
        }
        let kuw = ku + kl;
        for j in (0..n).rev() {
            let chi = (j + kuw).min(n - 1);
            let mut acc = b[j];
            for c in j + 1..=chi {
                acc -= self.ab[c * ldab + kl + ku + j - c] * b[c];
            }
            b[j] = acc / self.ab[j * ldab + kl + ku];
        }
    }
}

// ---------------------------------------------------------------------------
// small real dense LU (for the Woodbury capacitance matrix)

pub struct DenseLuR {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLuR {
    pub fn factor(a: &[f64], n: usize) -> Result<DenseLuR> {
        assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut piv = vec![0usize; n];
        for j in 0..n {
            let mut p = j;
            let mut best = lu[j * n + j].abs();
            for i in j + 1..n {
                if lu[i * n + j].abs() > best {
                    best = lu[i * n + j].abs();
                    p = i;
                }
            }
            piv[j] = p;
            if best == 0.0 {
                return Err(Error::numeric("singular dense system"));
            }
            if p != j {
                for c in 0..n {
                    lu.swap(j * n + c, p * n + c);
                }
            }
            let pivval = lu[j * n + j];
            for i in j + 1..n {
                let mult = lu[i * n + j] / pivval;
                lu[i * n + j] = mult;
                for c in j + 1..n {
                    let t = lu[j * n + c];
                    lu[i * n + c] -= mult * t;
                }
            }
        }
        Ok(DenseLuR { n, lu, piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // factor stores fully pivoted rows: apply all swaps before L-solve
        for j in 0..n {
            if self.piv[j] != j {
                b.swap(j, self.piv[j]);
            }
        }
        for j in 0..n {
            let bj = b[j];
            for i in j + 1..n {
                b[i] -= self.lu[i * n + j] * bj;
            }
        }
        for j in (0..n).rev() {
            let mut acc = b[j];
            for c in j + 1..n {
                acc -= self.lu[j * n + c] * b[c];
            }
            b[j] = acc / self.lu[j * n + j];
        }
    }
}

// ---------------------------------------------------------------------------
// bordered solver: banded core + a few dense rows via Woodbury

/// Solves M x = b where M equals a banded matrix except on a small set of
/// rows that carry arbitrary (cross-band) entries. The banded core A keeps
/// identity rows at those positions; M = A + sum_r e_r c_r^T with
/// c_r = (desired row) - e_r, and the Woodbury identity reduces each solve
/// to one banded solve plus a q x q correction, q = number of special rows.
pub struct BorderedSolver {
    base: BandedLu,
    /// border rows as (row index, sparse row entries)
    border: Vec<(usize, Vec<(usize, f64)>)>,
    /// W = A^{-1} [e_r ...], n x q column-major
    w: Vec<f64>,
    s_lu: DenseLuR,
    n: usize,
}

impl BorderedSolver {
    /// `core` must already hold identity rows (single 1.0 on the diagonal)
    /// at every border row index.
    pub fn new(core: &Banded, border_rows: &[(usize, Vec<(usize, f64)>)]) -> Result<Self> {
        let n = core.n;
        let q = border_rows.len();
        let base = BandedLu::factor(core)?;
        // border corrections c_r = row - e_r
        let border: Vec<(usize, Vec<(usize, f64)>)> = border_rows
            .iter()
            .map(|(r, entries)| {
                let mut c: Vec<(usize, f64)> = Vec::with_capacity(entries.len() + 1);
                let mut seen_diag = false;
                for &(col, v) in entries {
                    if col == *r {
                        c.push((col, v - 1.0));
                        seen_diag = true;
                    } else {
                        c.push((col, v));
                    }
                }
                if !seen_diag {
                    c.push((*r, -1.0));
                }
                (*r, c)
            })
            .collect();
        let mut w = vec![0.0f64; n * q];
        for (idx, (r, _)) in border.iter().enumerate() {
            let col = &mut w[idx * n..(idx + 1) * n];
            col[*r] = 1.0;
            base.solve_in_place(col);
        }
        // S = I_q + C^T W
        let mut s = vec![0.0f64; q * q];
        for i in 0..q {
            for jq in 0..q {
                let mut acc = if i == jq { 1.0 } else { 0.0 };
                for &(col, v) in &border[i].1 {
                    acc += v * w[jq * n + col];
                }
                s[i * q + jq] = acc;
            }
        }
        let s_lu = DenseLuR::factor(&s, q)?;
        Ok(BorderedSolver {
            base,
            border,
            w,
            s_lu,
            n,
        })
    }

    /// Solve M x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let q = self.border.len();
        self.base.solve_in_place(b);
        if q == 0 {
            return;
        }
        let mut cy = vec![0.0f64; q];
        for (i, (_, c)) in self.border.iter().enumerate() {
            cy[i] = c.iter().map(|&(col, v)| v * b[col]).sum();
        }
        self.s_lu.solve_in_place(&mut cy);
        for jq in 0..q {
            let coef = cy[jq];
            if coef != 0.0 {
                let col = &self.w[jq * self.n..(jq + 1) * self.n];
                for (bi, wi) in b.iter_mut().zip(col) {
                    *bi -= coef * wi;
                }
            }
        }
    }
}
