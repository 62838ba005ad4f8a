//! Small dense linear-algebra helpers shared across the crate.
//!
//! Pseudoinverses and numerical ranks use a rank-revealing SVD with a
//! relative singular-value cutoff; symmetric eigenvalue queries go through
//! `SymmetricEigen` on the symmetrized input.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff for numerical rank and pseudoinverses.
pub const RANK_CUTOFF: f64 = 1e-8;

/// Numerical rank at the relative cutoff `tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > tol * smax).count()
}

/// Moore-Penrose pseudoinverse with singular values below `tol * sigma_max`
/// treated as zero.
pub fn pinv(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = tol * smax;
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let mut sinv = DMatrix::zeros(vt.nrows(), u.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            sinv[(k, k)] = 1.0 / s;
        }
    }
    vt.transpose() * sinv * u.transpose()
}

/// Minimum-norm least-squares solution of `A X = B`.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    pinv(a, tol) * b
}

/// Induced 2-norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Eigenvalues of the symmetric part `(M + M^T)/2`, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DVector::from_vec(eigs)
}

/// Largest eigenvalue of the symmetric part.
pub fn lambda_max_sym(m: &DMatrix<f64>) -> f64 {
    let e = symmetric_eigenvalues(m);
    e[e.len() - 1]
}

/// Smallest eigenvalue of the symmetric part.
pub fn lambda_min_sym(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m)[0]
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let inv = sym.cholesky()?.inverse();
    Some((&inv + inv.transpose()) * 0.5)
}

/// Max absolute entry; zero for empty matrices.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_recovers_right_inverse_of_wide_full_rank() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 2.0, -1.0, 0.0, 1.0, 1.0, 3.0]);
        let api = pinv(&a, RANK_CUTOFF);
        let id = &a * &api;
        assert!(max_abs(&(id - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn numerical_rank_detects_deficiency() {
        let mut a = DMatrix::<f64>::zeros(3, 5);
        a.row_mut(0).copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        a.row_mut(1).copy_from_slice(&[2.0, 4.0, 6.0, 8.0, 10.0]);
        a.row_mut(2).copy_from_slice(&[0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(numerical_rank(&a, RANK_CUTOFF), 2);
    }

    #[test]
    fn symmetric_part_eigenvalues_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 10.0, 0.0, 4.0]);
        let e = symmetric_eigenvalues(&m);
        assert!(e[0] <= e[1]);
        // trace preserved by symmetrization
        assert!((e.sum() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn spd_inverse_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&m).unwrap();
        assert!(max_abs(&(&m * inv - DMatrix::identity(2, 2))) < 1e-12);
    }
}
