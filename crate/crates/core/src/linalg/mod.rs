//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; the helpers here add the
//! validation and the few factorizations the physics modules need.

mod expm;
mod jordan;

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::{Error, Result};

pub use expm::matrix_exponential;
pub use jordan::{eigen_decompose, eigen_decompose_with, EigenCluster, EigenStructure};
pub(crate) use jordan::{
    cluster_chains, conjugate_partners, jordan_block, leading_phase, real_schur_eigenvalues, resolve_clusters,
};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from row-major `(re, im)` pairs.
pub fn cmatrix(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols, "entry count must be rows * cols");
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&(re, im)| c(re, im)))
}

pub fn cvector(entries: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&(re, im)| c(re, im)))
}

pub fn real_to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(|x| c(x, 0.0))
}

pub(crate) fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    Ok(a.nrows())
}

pub(crate) fn ensure_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    ensure_finite(a)?;
    Ok(spectral_norm(a))
}

/// Spectral norm without validation, for internal residuals.
pub(crate) fn spectral_norm<T>(a: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    if a.is_empty() {
        return 0.0;
    }
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .fold(0.0, |m: f64, &s| m.max(s))
}

/// `max(1, ‖a‖)`, the reference scale for relative tolerances.
pub(crate) fn unit_scale(a: &CMatrix) -> f64 {
    spectral_norm(a).max(1.0)
}

/// Singular values in descending order with the matching right singular
/// vectors as columns. Wide inputs are zero-padded so a full basis of the
/// domain is always returned.
pub(crate) fn right_singular<T>(a: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (rows, cols) = a.shape();
    let padded;
    let a = if rows < cols {
        let mut p = DMatrix::<T>::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = DMatrix::from_fn(cols, order.len(), |r, k| v_t[(order[k], r)].conjugate());
    (values, v)
}

/// Orthonormal basis of the column span, dropping directions below
/// `rel_tol · σ_max`.
pub(crate) fn column_basis<T>(a: &DMatrix<T>, rel_tol: f64) -> DMatrix<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0, |m: f64, &s| m.max(s));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |r, k| u[(r, keep[k])])
}

pub(crate) fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub(crate) fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    hermitian_eigen(a).0
}

pub(crate) fn check_hermitian(a: &CMatrix, tol: f64) -> Result<()> {
    let asym = spectral_norm(&(a - a.adjoint()));
    if asym > tol * unit_scale(a) {
        return Err(Error::NotHermitian(asym));
    }
    Ok(())
}

/// Hermitian square root of a positive semidefinite matrix. Eigenvalues in
/// `[-1e-12·max(1,‖A‖), 0)` are clamped to zero.
pub fn psd_square_root(a: &CMatrix) -> Result<CMatrix> {
    ensure_square(a)?;
    ensure_finite(a)?;
    check_hermitian(a, 1e-10)?;
    let (values, vectors) = hermitian_eigen(a);
    let floor = -1e-12 * unit_scale(a);
    if let Some(&worst) = values.iter().find(|&&v| v < floor) {
        return Err(Error::NotPsd(worst));
    }
    let roots = CVector::from_iterator(values.len(), values.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)));
    let b = &vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint();
    Ok(hermitian_part(&b))
}

/// Inverse with a singularity guard on the reciprocal condition number.
pub(crate) fn inverse(a: &CMatrix) -> Result<CMatrix> {
    let (values, _) = right_singular(a);
    let smax = values.first().copied().unwrap_or(0.0);
    let smin = values.last().copied().unwrap_or(0.0);
    if !(smax > 0.0) || smin <= 1e-14 * smax {
        return Err(Error::Singular);
    }
    a.clone().try_inverse().ok_or(Error::Singular)
}

pub(crate) fn condition_number(a: &CMatrix) -> f64 {
    let (values, _) = right_singular(a);
    let smin = values.last().copied().unwrap_or(0.0);
    if smin == 0.0 {
        f64::INFINITY
    } else {
        values[0] / smin
    }
}

pub(crate) fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `(v ↦ conj(v))` applied entrywise to a matrix.
pub(crate) fn conj(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}
