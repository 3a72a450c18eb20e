//! Iterative radix-2 FFT and FFT-based linear convolution. Convolutions of
//! causal sample sequences are the inner loop of the fractional-integral and
//! boundary-forcing operators.

use num_complex::Complex64;

/// In-place radix-2 FFT; `data.len()` must be a power of two.
/// `inverse` applies the conjugate transform and the 1/n scaling.
pub fn fft(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    // twiddle table exp(sign * 2 pi i k / n), k < n/2
    let sign = if inverse { 1.0 } else { -1.0 };
    let step = sign * 2.0 * std::f64::consts::PI / n as f64;
    let table: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let (s, c) = (step * k as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = table[k * stride];
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Full linear convolution, output length a.len() + b.len() - 1.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    // direct form for small sizes
    if a.len().min(b.len()) <= 16 || out_len <= 64 {
        let mut out = vec![Complex64::new(0.0, 0.0); out_len];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] += ai * bj;
            }
        }
        return out;
    }
    let n = out_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = vec![Complex64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    fft(&mut fa, false);
    fft(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft(&mut fa, true);
    fa.truncate(out_len);
    fa
}

/// Convolution of real weight sequences, same-length prefix as `convolve`.
#[cfg(test)]
pub fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    convolve(&ac, &bc).into_iter().map(|z| z.re).collect()
}
