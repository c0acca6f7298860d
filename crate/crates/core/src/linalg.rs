//! Thin SVD-based helpers over nalgebra: spectra, numerical kernels and
//! minimum-norm least squares.

use alloc::vec::Vec;
use nalgebra::{ComplexField, DMatrix, DVector};

/// Singular values in descending order.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > rel_tol * top).count(),
        _ => 0,
    }
}

/// Spectrum of a real matrix padded with zeros up to `ncols` entries, so
/// that the tail counts the column-space deficiency of wide matrices too.
pub fn padded_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s = singular_values(m);
    s.resize(m.ncols(), 0.0);
    s
}

/// Orthonormal basis (as columns) of the right singular vectors belonging to
/// the `dim` smallest singular values of a real matrix.
pub fn trailing_right_singular_vectors(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let n = m.ncols();
    // pad wide matrices so the thin SVD still returns a full V
    let square = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut basis = DMatrix::zeros(n, dim);
    for (col, &idx) in order.iter().take(dim).enumerate() {
        basis.set_column(col, &v_t.row(idx).transpose());
    }
    basis
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// values below `rel_tol * sigma_max`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(b, rel_tol * top).expect("U and V^T were computed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(numerical_rank(&m, 1e-12), 1);
        let k = trailing_right_singular_vectors(&m, 2);
        let prod = &m * &k;
        assert!(prod.norm() < 1e-12);
        assert!((k.transpose() * &k - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert_eq!(padded_spectrum(&m).len(), 3);
    }

    #[test]
    fn least_squares() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(alloc::vec![1.0, 2.0, 3.0]);
        let x = lstsq(&a, &b, 1e-14);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }
}
