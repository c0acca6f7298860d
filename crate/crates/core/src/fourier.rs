//! Polynomial evaluation and discrete Fourier analysis on roots of unity.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;

/// The `m`-th roots of unity `exp(2 pi i j / m)`, `j = 0..m`.
pub fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / m as f64))
        .collect()
}

/// Horner evaluation of `sum_k coeffs[k] x^k`.
#[inline]
pub fn horner(coeffs: impl DoubleEndedIterator<Item = Complex64>, x: Complex64) -> Complex64 {
    coeffs.rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Coefficient of `zeta^freq` of the trigonometric polynomial sampled at the
/// `samples.len()`-th roots of unity. Exact when the sampled function has no
/// frequencies aliasing onto `freq`.
pub fn coefficient(samples: &[Complex64], freq: i64) -> Complex64 {
    let m = samples.len();
    let k = freq.rem_euclid(m as i64) as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, s) in samples.iter().enumerate() {
        // reduce the phase index first so large m keeps full accuracy
        let idx = (j * k) % m;
        acc += s * Complex64::from_polar(1.0, -TAU * idx as f64 / m as f64);
    }
    acc / m as f64
}

/// Coefficients for frequencies `lo..=hi` (as a vector indexed from `lo`).
pub fn coefficients(samples: &[Complex64], lo: i64, hi: i64) -> Vec<Complex64> {
    (lo..=hi).map(|f| coefficient(samples, f)).collect()
}
