//! Metric operators `η = (Ψ⁻¹)†·S·Ψ⁻¹` and η-inner products.

use num_complex::Complex64;

use crate::canonical::{BlockKind, CanonicalDecomposition};
use crate::linalg::{c, ensure_dim, ensure_square, hermitian_eigenvalues, hermitian_part, spectral_norm, trace, CMatrix, CVector};
use crate::{Error, Result};

/// One sign `ε = ±1` per real-eigenvalue block, in block order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignCharacteristic {
    epsilons: Vec<i8>,
}

impl SignCharacteristic {
    pub fn new(epsilons: Vec<i8>) -> Result<Self> {
        if epsilons.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidInput("sign characteristic entries must be +1 or -1".into()));
        }
        Ok(Self { epsilons })
    }

    pub fn all_positive(n: usize) -> Self {
        Self { epsilons: vec![1; n] }
    }

    /// All `+1`, sized for the real blocks of `decomp`.
    pub fn default_for(decomp: &CanonicalDecomposition) -> Self {
        Self::all_positive(decomp.real_block_count())
    }

    pub fn epsilons(&self) -> &[i8] {
        &self.epsilons
    }

    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone)]
pub struct MetricOperator {
    pub eta: CMatrix,
    pub signs: SignCharacteristic,
    pub positive_definite: bool,
    /// The block matrix `S` with `Ψ†ηΨ = S`.
    pub s: CMatrix,
    pub decomposition: CanonicalDecomposition,
}

impl MetricOperator {
    pub fn inertia(&self) -> Inertia {
        inertia(&self.eta)
    }

    /// Inertia `S` must share with `η`.
    pub fn expected_inertia(&self) -> Inertia {
        inertia(&self.s)
    }
}

/// `Tr(ηρ) = Tr(S·R)` in terms of the basis coefficients `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub r: CMatrix,
}

impl CoefficientMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.r[(i, j)]
    }
}

/// Reversal matrix `S_n` (ones on the anti-diagonal).
pub fn reversal(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i + j + 1 == n { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// Assembles `S`: `S_{2n}` for each conjugate pair, `ε·S_n` for each real block.
pub fn sign_matrix(decomp: &CanonicalDecomposition, signs: &SignCharacteristic) -> Result<CMatrix> {
    let real_blocks = decomp.real_block_count();
    if signs.len() != real_blocks {
        return Err(Error::SignLength { expected: real_blocks, found: signs.len() });
    }
    let d = decomp.dim();
    let mut s = CMatrix::zeros(d, d);
    let mut eps = signs.epsilons().iter();
    for b in &decomp.blocks {
        let size = b.size();
        match b.kind {
            BlockKind::ComplexConjugatePair(_) => {
                s.view_mut((b.offset, b.offset), (size, size)).copy_from(&reversal(size));
            }
            _ => {
                let e = *eps.next().expect("sign count checked");
                s.view_mut((b.offset, b.offset), (size, size)).copy_from(&(reversal(size) * c(e as f64, 0.0)));
            }
        }
    }
    Ok(s)
}

pub fn build_metric(decomp: &CanonicalDecomposition, signs: &SignCharacteristic) -> Result<MetricOperator> {
    let s = sign_matrix(decomp, signs)?;
    let inv = &decomp.psi_inv;
    let eta = hermitian_part(&(inv.adjoint() * &s * inv));
    let values = hermitian_eigenvalues(&eta);
    let norm = spectral_norm(&eta);
    let smallest_abs = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if !(smallest_abs > 1e-12 * norm) {
        return Err(Error::IllConditioned { what: "metric operator is numerically singular".into(), residual: smallest_abs });
    }
    let positive_definite = values[0] > 1e-12 * norm;
    Ok(MetricOperator { eta, signs: signs.clone(), positive_definite, s, decomposition: decomp.clone() })
}

/// `‖H†η − ηH‖`.
pub fn verify_metric(h: &CMatrix, eta: &CMatrix) -> Result<f64> {
    let d = ensure_square(h)?;
    ensure_dim(d, ensure_square(eta)?)?;
    Ok(spectral_norm(&(h.adjoint() * eta - eta * h)))
}

/// `⟨φ₁|η|φ₂⟩`, antilinear in the first argument.
pub fn eta_inner(phi1: &CVector, phi2: &CVector, eta: &CMatrix) -> Result<Complex64> {
    let d = ensure_square(eta)?;
    ensure_dim(d, phi1.len())?;
    ensure_dim(d, phi2.len())?;
    Ok(phi1.dotc(&(eta * phi2)))
}

/// `Tr(ηρ)`.
pub fn eta_trace(rho: &CMatrix, eta: &CMatrix) -> Result<Complex64> {
    let d = ensure_square(eta)?;
    ensure_dim(d, ensure_square(rho)?)?;
    Ok(trace(&(eta * rho)))
}

/// `R = Ψ⁻¹·ρ·(Ψ⁻¹)†`, so that `ρ = Σ Rᵢⱼ|ψᵢ⟩⟨ψⱼ|`.
pub fn basis_coefficients(rho: &CMatrix, decomp: &CanonicalDecomposition) -> Result<CoefficientMatrix> {
    ensure_dim(decomp.dim(), ensure_square(rho)?)?;
    let inv = &decomp.psi_inv;
    Ok(CoefficientMatrix { r: inv * rho * inv.adjoint() })
}

pub fn is_positive_definite(metric: &MetricOperator) -> bool {
    metric.positive_definite
}

/// Inertia of a Hermitian matrix, with zero meaning `|λ| ≤ 1e-12·‖A‖`.
pub fn inertia(a: &CMatrix) -> Inertia {
    let cutoff = 1e-12 * spectral_norm(a);
    let values = hermitian_eigenvalues(a);
    Inertia {
        positive: values.iter().filter(|&&v| v > cutoff).count(),
        negative: values.iter().filter(|&&v| v < -cutoff).count(),
        zero: values.iter().filter(|&&v| v.abs() <= cutoff).count(),
    }
}
