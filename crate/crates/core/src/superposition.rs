//! Superposition-free states and Kraus operators relative to a fixed,
//! possibly non-orthogonal basis.

use crate::canonical::{pt_canonical_form, CanonicalDecomposition};
use crate::config::Tolerances;
use crate::dynamics::{propagator, validate_density, TimeGrid};
use crate::linalg::{c, ensure_dim, ensure_square, hermitian_eigenvalues, inverse, psd_square_root, right_singular, spectral_norm, CMatrix, CVector};
use crate::pt::PTPair;
use crate::{Error, Result};

/// Default smallest singular value accepted for a basis matrix.
pub const DEFAULT_LIN_TOL: f64 = 1e-10;

/// Linearly independent unit vectors `c₁ … c_d`.
#[derive(Debug, Clone)]
pub struct FreeBasis {
    matrix: CMatrix,
}

impl FreeBasis {
    /// Normalizes the vectors and checks independence at `lin_tol`.
    pub fn new(vectors: &[CVector], lin_tol: f64) -> Result<Self> {
        let d = vectors.first().map(|v| v.len()).ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
        ensure_dim(d, vectors.len())?;
        let mut cols = Vec::with_capacity(d);
        for v in vectors {
            ensure_dim(d, v.len())?;
            let n = v.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(Error::InvalidInput("basis vectors must be nonzero and finite".into()));
            }
            cols.push(v / c(n, 0.0));
        }
        let matrix = CMatrix::from_columns(&cols);
        let (sv, _) = right_singular(&matrix);
        let smin = *sv.last().expect("nonempty");
        if smin <= lin_tol {
            return Err(Error::InvalidInput(format!("basis is linearly dependent (smallest singular value {smin:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn from_columns(m: &CMatrix, lin_tol: f64) -> Result<Self> {
        ensure_square(m)?;
        let cols: Vec<CVector> = m.column_iter().map(|v| v.into_owned()).collect();
        Self::new(&cols, lin_tol)
    }

    pub fn computational(d: usize) -> Self {
        Self { matrix: CMatrix::identity(d, d) }
    }

    /// Normalized columns of `Ψ`.
    pub fn from_decomposition(decomp: &CanonicalDecomposition) -> Result<Self> {
        Self::from_columns(&decomp.psi, DEFAULT_LIN_TOL)
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.matrix.column(i).into_owned()
    }
}

/// Weights `pᵢ` (diagonal coefficients) and the largest off-diagonal
/// coefficient modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeDecomposition {
    pub weights: Vec<f64>,
    pub residual: f64,
}

/// Coefficient criterion: `R = C⁻¹ρ(C⁻¹)†` must be diagonal with nonnegative entries.
pub fn is_superposition_free(rho: &CMatrix, basis: &FreeBasis, tol: f64) -> Result<(bool, FreeDecomposition)> {
    ensure_dim(basis.dim(), ensure_square(rho)?)?;
    validate_density(rho)?;
    let inv = inverse(basis.matrix())?;
    let r = &inv * rho * inv.adjoint();
    let d = basis.dim();
    let mut residual: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                residual = residual.max(r[(i, j)].norm());
            }
        }
    }
    let weights: Vec<f64> = (0..d).map(|i| r[(i, i)].re).collect();
    let free = residual <= tol && weights.iter().all(|&p| p >= -tol) && (0..d).all(|i| r[(i, i)].im.abs() <= tol);
    Ok((free, FreeDecomposition { weights, residual }))
}

/// `is_superposition_free` for an orthonormal basis.
pub fn is_incoherent(rho: &CMatrix, orthobasis: &FreeBasis, tol: f64) -> Result<(bool, FreeDecomposition)> {
    let m = orthobasis.matrix();
    let deviation = spectral_norm(&(m.adjoint() * m - CMatrix::identity(m.ncols(), m.ncols())));
    if deviation > tol {
        return Err(Error::NotOrthonormal(deviation));
    }
    is_superposition_free(rho, orthobasis, tol)
}

/// Largest parallelism defect `1 − |⟨cⱼ|Kcᵢ⟩|/‖Kcᵢ‖` over basis vectors not
/// annihilated (at `tol`), minimized over `j`.
pub fn kraus_defect(k: &CMatrix, basis: &FreeBasis, tol: f64) -> Result<f64> {
    ensure_dim(basis.dim(), ensure_square(k)?)?;
    let images = k * basis.matrix();
    let mut worst: f64 = 0.0;
    for v in images.column_iter() {
        let n = v.norm();
        if n <= tol {
            continue;
        }
        let best = basis
            .matrix()
            .column_iter()
            .map(|cj| 1.0 - cj.dotc(&v).norm() / n)
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best.max(0.0));
    }
    Ok(worst)
}

/// Whether `K` maps every basis projector to (a multiple of) a basis projector.
pub fn is_free_kraus(k: &CMatrix, basis: &FreeBasis, tol: f64) -> bool {
    kraus_defect(k, basis, tol).map(|d| d <= tol).unwrap_or(false)
}

/// `F = √(I − K†K)`, so that `F†F + K†K = I`.
pub fn kraus_completion(k: &CMatrix) -> Result<CMatrix> {
    let d = ensure_square(k)?;
    let defect = CMatrix::identity(d, d) - k.adjoint() * k;
    let smallest = hermitian_eigenvalues(&defect)[0];
    if smallest < -1e-12 {
        return Err(Error::ContractionViolated(smallest));
    }
    psd_square_root(&defect)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreePoint {
    pub t: f64,
    pub defect: f64,
    /// Largest eigenvalue of `c²U†U`.
    pub contraction: f64,
}

#[derive(Debug, Clone)]
pub struct FreeEvolutionReport {
    pub free: bool,
    pub trace_nonincreasing: bool,
    pub worst_defect: f64,
    pub worst_contraction: f64,
    pub points: Vec<FreePoint>,
}

/// Checks that `c·U(t)` is a free, trace-nonincreasing Kraus operator for the
/// normalized eigenbasis of an unbroken `H` at every grid time.
pub fn verify_free_evolution(
    h: &CMatrix,
    pair: &PTPair,
    scale: f64,
    grid: &TimeGrid,
    tol: f64,
    tols: &Tolerances,
) -> Result<FreeEvolutionReport> {
    let decomp = pt_canonical_form(h, pair, tols)?;
    if !decomp.spectral_class().is_unbroken() {
        return Err(Error::BrokenHamiltonian);
    }
    let basis = FreeBasis::from_decomposition(&decomp)?;
    let mut points = Vec::with_capacity(grid.num_points);
    for t in grid.times() {
        let k = propagator(h, t)? * c(scale, 0.0);
        let defect = kraus_defect(&k, &basis, tol)?;
        let contraction = *hermitian_eigenvalues(&(k.adjoint() * &k)).last().expect("nonempty");
        points.push(FreePoint { t, defect, contraction });
    }
    let worst_defect = points.iter().map(|p| p.defect).fold(0.0, f64::max);
    let worst_contraction = points.iter().map(|p| p.contraction).fold(0.0, f64::max);
    let trace_nonincreasing = worst_contraction <= 1.0 + tol;
    Ok(FreeEvolutionReport { free: worst_defect <= tol && trace_nonincreasing, trace_nonincreasing, worst_defect, worst_contraction, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cmatrix, cvector};

    fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        cmatrix(2, 2, &[(h, 0.0), (h, 0.0), (h, 0.0), (-h, 0.0)])
    }

    #[test]
    fn basis_projector_is_free() {
        let basis = FreeBasis::new(&[cvector(&[(1.0, 0.0), (0.0, 0.0)]), cvector(&[(1.0, 0.0), (1.0, 0.0)])], 1e-10).unwrap();
        let c1 = basis.vector(0);
        let (free, dec) = is_superposition_free(&(&c1 * c1.adjoint()), &basis, 1e-9).unwrap();
        assert!(free);
        assert!((dec.weights[0] - 1.0).abs() < 1e-12 && dec.weights[1].abs() < 1e-12);
    }

    #[test]
    fn sum_of_nonparallel_vectors_is_not_free() {
        let basis = FreeBasis::new(&[cvector(&[(1.0, 0.0), (0.0, 0.0)]), cvector(&[(1.0, 0.0), (1.0, 0.0)])], 1e-10).unwrap();
        let xi = (basis.vector(0) + basis.vector(1)).normalize();
        let (free, dec) = is_superposition_free(&(&xi * xi.adjoint()), &basis, 1e-9).unwrap();
        assert!(!free);
        assert!(dec.residual > 0.1);
    }

    #[test]
    fn maximally_mixed_is_incoherent_everywhere() {
        let rho = CMatrix::identity(2, 2) * c(0.5, 0.0);
        let basis = FreeBasis::from_columns(&hadamard(), 1e-10).unwrap();
        let (free, dec) = is_incoherent(&rho, &basis, 1e-9).unwrap();
        assert!(free);
        assert!(dec.weights.iter().all(|w| (w - 0.5).abs() < 1e-12));
        let plus = cmatrix(2, 2, &[(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)]);
        assert!(!is_incoherent(&plus, &FreeBasis::computational(2), 1e-9).unwrap().0);
        let diag = cmatrix(2, 2, &[(0.3, 0.0), (0.0, 0.0), (0.0, 0.0), (0.7, 0.0)]);
        assert!(is_incoherent(&diag, &FreeBasis::computational(2), 1e-9).unwrap().0);
    }

    #[test]
    fn incoherence_needs_orthonormal_basis() {
        let basis = FreeBasis::new(&[cvector(&[(1.0, 0.0), (0.0, 0.0)]), cvector(&[(1.0, 0.0), (1.0, 0.0)])], 1e-10).unwrap();
        let rho = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(matches!(is_incoherent(&rho, &basis, 1e-9), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn kraus_examples() {
        let basis = FreeBasis::computational(2);
        assert!(is_free_kraus(&CMatrix::identity(2, 2), &basis, 1e-8));
        let swap = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert!(is_free_kraus(&swap, &basis, 1e-8));
        assert!(!is_free_kraus(&hadamard(), &basis, 1e-8));
        assert!((kraus_defect(&hadamard(), &basis, 1e-8).unwrap() - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn completion_sums_to_identity() {
        let k = hadamard() * c(0.6, 0.0);
        let f = kraus_completion(&k).unwrap();
        assert!((f.adjoint() * &f + k.adjoint() * &k - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert!(matches!(kraus_completion(&(hadamard() * c(2.0, 0.0))), Err(Error::ContractionViolated(_))));
    }

    #[test]
    fn dependent_basis_rejected() {
        let v = cvector(&[(1.0, 0.0), (1.0, 0.0)]);
        assert!(FreeBasis::new(&[v.clone(), v], 1e-10).is_err());
    }
}
