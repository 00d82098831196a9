//! Parity and time-reversal operators.
//!
//! Time reversal is antilinear: it is stored as a matrix `T` acting as
//! `v ↦ T·conj(v)`, and conjugation is applied only at call time.

use crate::error::Violation;
use crate::linalg::{conj, ensure_dim, ensure_finite, ensure_square, spectral_norm, CMatrix, CVector};
use crate::{Error, Result};

/// Linear involution `P² = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityOperator(CMatrix);

impl ParityOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// Antilinear involution `v ↦ T·conj(v)` with `T·conj(T) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeReversalOperator(CMatrix);

impl TimeReversalOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// A validated (P, T) pair. The combined operator acts as `v ↦ (PT)·conj(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PTPair {
    parity: ParityOperator,
    time_reversal: TimeReversalOperator,
    product: CMatrix,
}

pub const DEFAULT_VAL_TOL: f64 = 1e-10;

/// Checks `P² = I`, `T·conj(T) = I`, `P·T = T·conj(P)` and
/// `(PT)·conj(PT) = I`, reporting every failed identity.
pub fn validate_pt_pair(p: &CMatrix, t: &CMatrix, val_tol: f64) -> Result<PTPair> {
    let d = ensure_square(p)?;
    ensure_dim(d, ensure_square(t)?)?;
    ensure_finite(p)?;
    ensure_finite(t)?;
    if !(val_tol > 0.0) {
        return Err(Error::InvalidInput("val_tol must be positive".into()));
    }
    let id = CMatrix::identity(d, d);
    let scale = spectral_norm(p).max(1.0) * spectral_norm(t).max(1.0);
    let pt = p * t;
    let checks = [
        ("P^2 = I", spectral_norm(&(p * p - &id))),
        ("T conj(T) = I", spectral_norm(&(t * conj(t) - &id))),
        ("P T = T conj(P)", spectral_norm(&(&pt - t * conj(p)))),
        ("(PT) conj(PT) = I", spectral_norm(&(&pt * conj(&pt) - &id))),
    ];
    let violations: Vec<Violation> = checks
        .iter()
        .filter(|(_, r)| !(*r <= val_tol * scale * scale))
        .map(|&(identity, residual)| Violation { identity, residual })
        .collect();
    if !violations.is_empty() {
        return Err(Error::PtPairInvalid(violations));
    }
    Ok(PTPair {
        parity: ParityOperator(p.clone()),
        time_reversal: TimeReversalOperator(t.clone()),
        product: pt,
    })
}

impl PTPair {
    pub fn dim(&self) -> usize {
        self.product.nrows()
    }

    pub fn parity(&self) -> &ParityOperator {
        &self.parity
    }

    pub fn time_reversal(&self) -> &TimeReversalOperator {
        &self.time_reversal
    }

    /// The matrix `PT`; the operator itself is `v ↦ PT·conj(v)`.
    pub fn product(&self) -> &CMatrix {
        &self.product
    }

    /// Applies the antilinear operator column-wise to a matrix.
    pub fn apply_to_columns(&self, m: &CMatrix) -> CMatrix {
        &self.product * conj(m)
    }
}

pub fn apply_antilinear(pair: &PTPair, v: &CVector) -> Result<CVector> {
    ensure_dim(pair.dim(), v.len())?;
    Ok(&pair.product * v.map(|z| z.conj()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// `‖H·PT − PT·conj(H)‖`.
    pub residual: f64,
}

/// PT-symmetry test `H·PT = PT·conj(H)`, relative to `max(1, ‖H‖)`.
pub fn is_pt_symmetric(h: &CMatrix, pair: &PTPair, tol: f64) -> Result<SymmetryCheck> {
    ensure_dim(pair.dim(), ensure_square(h)?)?;
    ensure_finite(h)?;
    let a = pair.product();
    let residual = spectral_norm(&(h * a - a * conj(h)));
    Ok(SymmetryCheck { symmetric: residual <= tol * spectral_norm(h).max(1.0), residual })
}
