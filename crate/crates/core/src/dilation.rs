//! Unitary dilation of the contraction `c·U(t)` for unbroken Hamiltonians and
//! the post-selected realization of the normalized evolution.

use crate::canonical::{pt_canonical_form, CanonicalDecomposition};
use crate::config::Tolerances;
use crate::dynamics::{propagator, validate_density, TimeGrid};
use crate::linalg::{c, ensure_dim, ensure_square, hermitian_eigenvalues, hermitian_part, psd_square_root, spectral_norm, trace, CMatrix};
use crate::pt::PTPair;
use crate::{Error, Result};

/// Margin kept below one in [`uniform_bound`].
pub const SLACK: f64 = 0.99;

/// `c = 0.99 / (‖Ψ‖‖Ψ⁻¹‖)`, so that `c‖U(t)‖ < 1` for every real `t`.
pub fn uniform_bound(decomp: &CanonicalDecomposition) -> Result<f64> {
    if !decomp.spectral_class().is_unbroken() {
        return Err(Error::BrokenHamiltonian);
    }
    Ok(SLACK / (spectral_norm(&decomp.psi) * spectral_norm(&decomp.psi_inv)))
}

#[derive(Debug, Clone)]
pub struct DilationResult {
    pub c: f64,
    /// `[[cU, √(I − c²UU†)], [√(I − c²U†U), −cU†]]`.
    pub v: CMatrix,
    /// `‖V†V − I‖`.
    pub unitarity_residual: f64,
    /// Smallest eigenvalue of `I − c²U†U`.
    pub contraction_margin: f64,
}

pub fn halmos_dilation(u: &CMatrix, scale: f64) -> Result<DilationResult> {
    let d = ensure_square(u)?;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidInput(format!("dilation factor must be positive, got {scale}")));
    }
    let k = u * c(scale, 0.0);
    let id = CMatrix::identity(d, d);
    let right = hermitian_part(&(&id - k.adjoint() * &k));
    let left = hermitian_part(&(&id - &k * k.adjoint()));
    let contraction_margin = hermitian_eigenvalues(&right)[0];
    if contraction_margin < -1e-10 {
        return Err(Error::ContractionViolated(contraction_margin));
    }
    let mut v = CMatrix::zeros(2 * d, 2 * d);
    v.view_mut((0, 0), (d, d)).copy_from(&k);
    v.view_mut((0, d), (d, d)).copy_from(&psd_square_root(&left)?);
    v.view_mut((d, 0), (d, d)).copy_from(&psd_square_root(&right)?);
    v.view_mut((d, d), (d, d)).copy_from(&(-k.adjoint()));
    let unitarity_residual = spectral_norm(&(v.adjoint() * &v - CMatrix::identity(2 * d, 2 * d)));
    Ok(DilationResult { c: scale, v, unitarity_residual, contraction_margin })
}

/// `½ Σ |eig(a − b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b)).iter().map(|v| v.abs()).sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    pub c: f64,
    pub times: Vec<f64>,
    /// Largest trace distance between the post-selected and the direct state.
    pub max_deviation: f64,
    /// `c²·Tr[U(t)ρU†(t)]` per time.
    pub success_probability: Vec<f64>,
    pub max_unitarity_residual: f64,
}

pub fn embedded_evolution_check(
    h: &CMatrix,
    pair: &PTPair,
    rho: &CMatrix,
    grid: &TimeGrid,
    tols: &Tolerances,
) -> Result<EmbeddingReport> {
    let d = ensure_square(h)?;
    ensure_dim(d, ensure_square(rho)?)?;
    validate_density(rho)?;
    let decomp = pt_canonical_form(h, pair, tols)?;
    let scale = uniform_bound(&decomp)?;

    let mut embedded = CMatrix::zeros(2 * d, 2 * d);
    embedded.view_mut((0, 0), (d, d)).copy_from(rho);

    let times = grid.times();
    let mut max_deviation: f64 = 0.0;
    let mut max_unitarity_residual: f64 = 0.0;
    let mut success_probability = Vec::with_capacity(times.len());
    for &t in &times {
        let u = propagator(h, t)?;
        let dil = halmos_dilation(&u, scale)?;
        max_unitarity_residual = max_unitarity_residual.max(dil.unitarity_residual);
        let out = &dil.v * &embedded * dil.v.adjoint();
        let kept = out.view((0, 0), (d, d)).into_owned();
        let p = trace(&kept).re;
        if p < 1e-12 {
            return Err(Error::DegeneratePostSelection(p));
        }
        let direct = &u * rho * u.adjoint();
        let direct = &direct / trace(&direct);
        max_deviation = max_deviation.max(trace_distance(&hermitian_part(&(kept / c(p, 0.0))), &hermitian_part(&direct)));
        success_probability.push(p);
    }
    Ok(EmbeddingReport { c: scale, times, max_deviation, success_probability, max_unitarity_residual })
}
