//! Structured Jordan form of a PT-symmetric Hamiltonian.
//!
//! For PT-symmetric `H` there is an invertible `Ψ` with `Ψ⁻¹HΨ = J` and
//! `PT·conj(Ψ) = ΨK`, where `J` pairs each non-real Jordan block with its
//! conjugate and `K` is built from `S₂ ⊗ I` blocks (conjugate pairs) and
//! identity blocks (real eigenvalues).
//!
//! The construction first changes to a basis of PT-invariant vectors, in which
//! `H` becomes a real matrix and PT becomes plain conjugation. Real-eigenvalue
//! chains are then computed in real arithmetic (so they are PT-invariant by
//! construction) and each conjugate-pair chain is obtained by applying PT to
//! its partner.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::Tolerances;
use crate::linalg::{
    c, cluster_chains, condition_number, conjugate_partners, ensure_dim, ensure_finite, ensure_square,
    inverse, jordan_block, leading_phase, real_schur_eigenvalues, real_to_complex, resolve_clusters,
    spectral_norm, CMatrix, CVector,
};
use crate::pt::{is_pt_symmetric, PTPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    RealSimple,
    /// Real eigenvalue, Jordan block of the given order (≥ 2).
    RealJordan(usize),
    /// `J_n(λ) ⊕ J_n(λ̄)` for non-real `λ`, with `n` the order of each half.
    ComplexConjugatePair(usize),
}

impl BlockKind {
    pub fn is_real(self) -> bool {
        !matches!(self, BlockKind::ComplexConjugatePair(_))
    }
}

/// One block of `J`. For conjugate pairs `eigenvalue` is the member with
/// positive imaginary part and the block spans `2·order` columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub eigenvalue: Complex64,
    pub order: usize,
    pub kind: BlockKind,
    /// First column of the block in `Ψ`.
    pub offset: usize,
}

impl Block {
    pub fn size(&self) -> usize {
        match self.kind {
            BlockKind::ComplexConjugatePair(n) => 2 * n,
            _ => self.order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Unbroken,
    Broken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralClass {
    pub tag: Phase,
    pub detail: Vec<BlockKind>,
}

impl SpectralClass {
    fn from_blocks(blocks: &[Block]) -> Self {
        let detail: Vec<BlockKind> = blocks.iter().map(|b| b.kind).collect();
        let tag = if detail.iter().all(|k| *k == BlockKind::RealSimple) { Phase::Unbroken } else { Phase::Broken };
        Self { tag, detail }
    }

    pub fn is_unbroken(&self) -> bool {
        self.tag == Phase::Unbroken
    }

    /// `Unbroken`, `EP` (real Jordan blocks only), `ComplexPair` (conjugate
    /// pairs only) or `Broken` (both).
    pub fn label(&self) -> &'static str {
        let jordan = self.detail.iter().any(|k| matches!(k, BlockKind::RealJordan(_)));
        let pair = self.detail.iter().any(|k| matches!(k, BlockKind::ComplexConjugatePair(_)));
        match (jordan, pair) {
            (false, false) => "Unbroken",
            (true, false) => "EP",
            (false, true) => "ComplexPair",
            (true, true) => "Broken",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A defective cluster assembled from eigenvalues farther apart than
    /// `cluster_tol`; the EP decision depends on the tolerances.
    NearExceptionalPoint { eigenvalue: Complex64, spread: f64, condition: f64 },
}

#[derive(Debug, Clone)]
pub struct CanonicalDecomposition {
    pub psi: CMatrix,
    pub psi_inv: CMatrix,
    pub j: CMatrix,
    pub k: CMatrix,
    pub blocks: Vec<Block>,
    /// `‖Ψ⁻¹HΨ − J‖`.
    pub similarity_residual: f64,
    /// `‖PT·conj(Ψ) − ΨK‖`.
    pub structure_residual: f64,
    /// Spectral condition number of `Ψ`.
    pub condition: f64,
    pub warnings: Vec<Warning>,
    /// Reference scale `max(1, ‖H‖)`.
    pub scale: f64,
}

impl CanonicalDecomposition {
    pub fn dim(&self) -> usize {
        self.psi.nrows()
    }

    pub fn spectral_class(&self) -> SpectralClass {
        SpectralClass::from_blocks(&self.blocks)
    }

    pub fn real_block_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.kind.is_real()).count()
    }

    /// Eigenvalue on the diagonal of `J` at each column.
    pub fn column_eigenvalues(&self) -> Vec<Complex64> {
        self.j.diagonal().iter().copied().collect()
    }

    /// Columns `|ψᵢ⟩` of `Ψ`.
    pub fn basis_vector(&self, i: usize) -> CVector {
        self.psi.column(i).into_owned()
    }

    /// Rescales the columns of real simple blocks by nonzero real factors,
    /// which preserves every defining relation.
    pub fn with_column_scales(&self, scales: &[f64], h: &CMatrix, pair: &PTPair) -> Result<Self> {
        ensure_dim(self.dim(), scales.len())?;
        for b in &self.blocks {
            if b.kind != BlockKind::RealSimple && scales[b.offset..b.offset + b.size()].iter().any(|&s| s != 1.0) {
                return Err(Error::InvalidInput("only real simple blocks may be rescaled".into()));
            }
        }
        if scales.iter().any(|s| !s.is_finite() || *s == 0.0) {
            return Err(Error::InvalidInput("column scales must be finite and nonzero".into()));
        }
        let mut psi = self.psi.clone();
        for (i, &s) in scales.iter().enumerate() {
            psi.column_mut(i).scale_mut(s);
        }
        finish(h, pair, psi, self.j.clone(), self.k.clone(), self.blocks.clone(), self.warnings.clone(), self.scale)
    }
}

/// Unbroken / broken classification with `tol` as the eigenvalue clustering
/// tolerance; other tolerances take their defaults.
pub fn classify_spectrum(h: &CMatrix, pair: &PTPair, tol: f64) -> Result<SpectralClass> {
    let tols = Tolerances { cluster_tol: tol, ..Tolerances::default() };
    Ok(pt_canonical_form(h, pair, &tols)?.spectral_class())
}

pub fn pt_canonical_form(h: &CMatrix, pair: &PTPair, tols: &Tolerances) -> Result<CanonicalDecomposition> {
    let d = ensure_square(h)?;
    ensure_dim(pair.dim(), d)?;
    ensure_finite(h)?;
    tols.validate()?;
    let sym = is_pt_symmetric(h, pair, tols.val_tol)?;
    if !sym.symmetric {
        return Err(Error::NotPtSymmetric { residual: sym.residual });
    }
    let scale = spectral_norm(h).max(1.0);

    let g = invariant_frame(pair)?;
    let g_inv = inverse(&g)?;
    let h_frame = &g_inv * h * &g;
    let h_real: DMatrix<f64> = h_frame.map(|z| z.re);
    let h_cplx = real_to_complex(&h_real);

    let eigs = real_schur_eigenvalues(&h_real)?;
    let partner = conjugate_partners(&eigs)?;
    let mut accept = |members: &[usize], center: Complex64| {
        let fit = if center.im == 0.0 {
            cluster_chains(&h_real, center.re, members.len(), scale, tols.rank_tol).map(|cc| (cc.chains.len(), cc.residual))
        } else {
            cluster_chains(&h_cplx, center, members.len(), scale, tols.rank_tol).map(|cc| (cc.chains.len(), cc.residual))
        };
        fit.map(|(geometric, residual)| geometric < members.len() && residual <= tols.can_tol * scale)
            .unwrap_or(false)
    };
    let groups = resolve_clusters(&eigs, Some(&partner), scale, tols, &mut accept);

    // (eigenvalue, kind, chain in the original frame)
    let mut pieces: Vec<(Complex64, BlockKind, CMatrix)> = Vec::new();
    let mut warnings = Vec::new();
    for group in groups.iter().filter(|g| g.center.im >= 0.0) {
        let m = group.members.len();
        let chains: Vec<(Vec<CVector>, bool)> = if group.center.im == 0.0 {
            let cc = cluster_chains(&h_real, group.center.re, m, scale, tols.rank_tol)?;
            check_cluster(cc.residual, tols, scale)?;
            cc.chains
                .into_iter()
                .map(|ch| (ch.iter().map(|w| &g * real_to_complex(&DMatrix::from_column_slice(w.len(), 1, w.as_slice())).column(0)).collect(), true))
                .collect()
        } else {
            let cc = cluster_chains(&h_cplx, group.center, m, scale, tols.rank_tol)?;
            check_cluster(cc.residual, tols, scale)?;
            cc.chains.into_iter().map(|ch| (ch.iter().map(|w| &g * w).collect(), false)).collect()
        };
        for (chain, real) in chains {
            let order = chain.len();
            let head = &chain[0];
            let factor = if real {
                let lead = leading_phase(head);
                let sign = if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) { -1.0 } else { 1.0 };
                c(sign / head.norm(), 0.0)
            } else {
                leading_phase(head).conj() / head.norm()
            };
            let cols: Vec<CVector> = chain.into_iter().map(|v| v * factor).collect();
            let block = CMatrix::from_columns(&cols);
            let kind = match (real, order) {
                (true, 1) => BlockKind::RealSimple,
                (true, n) => BlockKind::RealJordan(n),
                (false, n) => BlockKind::ComplexConjugatePair(n),
            };
            pieces.push((group.center, kind, block));
        }
        if group.coalesced {
            let spread = group.members.iter().map(|&i| (eigs[i] - group.center).norm()).fold(0.0, f64::max);
            warnings.push(Warning::NearExceptionalPoint { eigenvalue: group.center, spread, condition: f64::NAN });
        }
    }

    pieces.sort_by(|a, b| {
        let rank = |k: BlockKind| if k.is_real() { 1 } else { 0 };
        let order = |k: BlockKind| match k {
            BlockKind::RealSimple => 1,
            BlockKind::RealJordan(n) | BlockKind::ComplexConjugatePair(n) => n,
        };
        rank(a.1)
            .cmp(&rank(b.1))
            .then(a.0.re.total_cmp(&b.0.re))
            .then(a.0.im.total_cmp(&b.0.im))
            .then(order(a.1).cmp(&order(b.1)))
    });

    let mut cols: Vec<CVector> = Vec::with_capacity(d);
    let mut j = CMatrix::zeros(d, d);
    let mut k = CMatrix::zeros(d, d);
    let mut blocks = Vec::with_capacity(pieces.len());
    for (lambda, kind, chain) in pieces {
        let offset = cols.len();
        let n = chain.ncols();
        match kind {
            BlockKind::ComplexConjugatePair(_) => {
                let twin = pair.apply_to_columns(&chain);
                cols.extend(chain.column_iter().map(|v| v.into_owned()));
                cols.extend(twin.column_iter().map(|v| v.into_owned()));
                j.view_mut((offset, offset), (n, n)).copy_from(&jordan_block(lambda, n));
                j.view_mut((offset + n, offset + n), (n, n)).copy_from(&jordan_block(lambda.conj(), n));
                for i in 0..n {
                    k[(offset + n + i, offset + i)] = c(1.0, 0.0);
                    k[(offset + i, offset + n + i)] = c(1.0, 0.0);
                }
            }
            _ => {
                cols.extend(chain.column_iter().map(|v| v.into_owned()));
                j.view_mut((offset, offset), (n, n)).copy_from(&jordan_block(lambda, n));
                for i in 0..n {
                    k[(offset + i, offset + i)] = c(1.0, 0.0);
                }
            }
        }
        blocks.push(Block { eigenvalue: lambda, order: n, kind, offset });
    }
    if cols.len() != d {
        return Err(Error::IllConditioned { what: "canonical basis is incomplete".into(), residual: f64::NAN });
    }
    let psi = CMatrix::from_columns(&cols);
    finish(h, pair, psi, j, k, blocks, warnings, scale).and_then(|dec| {
        if dec.similarity_residual > tols.can_tol * scale {
            return Err(Error::IllConditioned { what: "canonical similarity".into(), residual: dec.similarity_residual });
        }
        if dec.structure_residual > tols.can_tol * spectral_norm(&dec.psi).max(1.0) {
            return Err(Error::IllConditioned { what: "PT structure of the canonical basis".into(), residual: dec.structure_residual });
        }
        Ok(dec)
    })
}

fn check_cluster(residual: f64, tols: &Tolerances, scale: f64) -> Result<()> {
    if residual > tols.can_tol * scale {
        return Err(Error::IllConditioned { what: "Jordan chain construction".into(), residual });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    h: &CMatrix,
    pair: &PTPair,
    psi: CMatrix,
    j: CMatrix,
    k: CMatrix,
    blocks: Vec<Block>,
    mut warnings: Vec<Warning>,
    scale: f64,
) -> Result<CanonicalDecomposition> {
    let psi_inv = inverse(&psi).map_err(|_| Error::IllConditioned {
        what: "canonical basis is singular".into(),
        residual: f64::INFINITY,
    })?;
    let similarity_residual = spectral_norm(&(&psi_inv * h * &psi - &j));
    let structure_residual = spectral_norm(&(pair.apply_to_columns(&psi) - &psi * &k));
    let condition = condition_number(&psi);
    for w in &mut warnings {
        let Warning::NearExceptionalPoint { condition: slot, .. } = w;
        *slot = condition;
    }
    Ok(CanonicalDecomposition {
        psi,
        psi_inv,
        j,
        k,
        blocks,
        similarity_residual,
        structure_residual,
        condition,
        warnings,
        scale,
    })
}

/// Basis of PT-invariant vectors (`PT·conj(g) = g` for every column),
/// picked greedily from `eₖ + PT·eₖ` and `i(eₖ − PT·eₖ)`.
fn invariant_frame(pair: &PTPair) -> Result<CMatrix> {
    let a = pair.product();
    let d = a.nrows();
    let mut candidates: Vec<CVector> = Vec::with_capacity(2 * d);
    for k in 0..d {
        let e = CVector::from_fn(d, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let image = a.column(k).into_owned();
        candidates.push(&e + &image);
        candidates.push((&e - &image) * c(0.0, 1.0));
    }
    let mut residuals = candidates.clone();
    let mut chosen: Vec<CVector> = Vec::with_capacity(d);
    let mut used = vec![false; candidates.len()];
    for _ in 0..d {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, r)| (i, r.norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("candidates remain");
        if norm < 1e-8 {
            return Err(Error::IllConditioned { what: "PT-invariant frame".into(), residual: norm });
        }
        used[best] = true;
        let q = &residuals[best] / c(norm, 0.0);
        for (i, r) in residuals.iter_mut().enumerate() {
            if !used[i] {
                let proj = q.dotc(r);
                *r -= &q * proj;
            }
        }
        let g = &candidates[best];
        chosen.push(g / c(g.norm(), 0.0));
    }
    Ok(CMatrix::from_columns(&chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cmatrix;
    use crate::pt::validate_pt_pair;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn bender(r: f64, s: f64, theta: f64) -> CMatrix {
        cmatrix(
            2,
            2,
            &[(r * theta.cos(), r * theta.sin()), (s, 0.0), (s, 0.0), (r * theta.cos(), -r * theta.sin())],
        )
    }

    fn sx_pair() -> PTPair {
        let sx = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        validate_pt_pair(&sx, &CMatrix::identity(2, 2), 1e-10).unwrap()
    }

    #[test]
    fn bender_classification_three_cases() {
        let pair = sx_pair();
        assert!(classify_spectrum(&bender(1.0, 1.0, FRAC_PI_6), &pair, 1e-8).unwrap().is_unbroken());
        let broken = classify_spectrum(&bender(1.0, 0.5, FRAC_PI_2), &pair, 1e-8).unwrap();
        assert_eq!(broken.detail, vec![BlockKind::ComplexConjugatePair(1)]);
        let ep = classify_spectrum(&bender(1.0, 1.0, FRAC_PI_2), &pair, 1e-8).unwrap();
        assert_eq!(ep.detail, vec![BlockKind::RealJordan(2)]);
        assert_eq!(ep.label(), "EP");
    }

    #[test]
    fn diagonal_with_trivial_pair() {
        let pair = validate_pt_pair(&CMatrix::identity(2, 2), &CMatrix::identity(2, 2), 1e-10).unwrap();
        let h = cmatrix(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        let dec = pt_canonical_form(&h, &pair, &Tolerances::default()).unwrap();
        assert!((&dec.psi - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((&dec.j - &h).norm() < 1e-12);
        assert_eq!(dec.k, CMatrix::identity(2, 2));
    }

    #[test]
    fn exceptional_point_chain_relations() {
        let pair = sx_pair();
        let h = bender(1.0, 1.0, FRAC_PI_2);
        let dec = pt_canonical_form(&h, &pair, &Tolerances::default()).unwrap();
        let expected_j = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!((&dec.j - expected_j).norm() < 1e-10);
        assert_eq!(dec.k, CMatrix::identity(2, 2));
        let (p1, p2) = (dec.basis_vector(0), dec.basis_vector(1));
        assert!((&h * &p1).norm() < 1e-10);
        assert!((&h * &p2 - &p1).norm() < 1e-10);
        for v in [&p1, &p2] {
            let image = crate::pt::apply_antilinear(&pair, v).unwrap();
            assert!((image - v).norm() < 1e-10);
        }
    }

    #[test]
    fn complex_pair_is_swapped_by_pt() {
        let pair = sx_pair();
        let h = bender(1.0, 0.5, FRAC_PI_2);
        let dec = pt_canonical_form(&h, &pair, &Tolerances::default()).unwrap();
        let lambda = c(0.0, 3f64.sqrt() / 2.0);
        assert!((dec.j[(0, 0)] - lambda).norm() < 1e-12);
        assert!((dec.j[(1, 1)] - lambda.conj()).norm() < 1e-12);
        let s2 = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(dec.k, s2);
        let (p1, p2) = (dec.basis_vector(0), dec.basis_vector(1));
        assert!((crate::pt::apply_antilinear(&pair, &p1).unwrap() - &p2).norm() < 1e-12);
        assert!((crate::pt::apply_antilinear(&pair, &p2).unwrap() - &p1).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_symmetric_input() {
        let pair = sx_pair();
        let h = CMatrix::identity(2, 2) * c(0.0, 1.0);
        assert!(matches!(
            pt_canonical_form(&h, &pair, &Tolerances::default()),
            Err(Error::NotPtSymmetric { .. })
        ));
    }

    #[test]
    fn block_ordering_pairs_first_then_real_ascending() {
        // real frame: blockdiag(rotation pair around 1 ± 0.5i, 3, -2) with P = T = I
        let h = cmatrix(
            4,
            4,
            &[
                (3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0),
                (0.0, 0.0), (1.0, 0.0), (0.5, 0.0), (0.0, 0.0),
                (0.0, 0.0), (-0.5, 0.0), (1.0, 0.0), (0.0, 0.0),
                (0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-2.0, 0.0),
            ],
        );
        let pair = validate_pt_pair(&CMatrix::identity(4, 4), &CMatrix::identity(4, 4), 1e-10).unwrap();
        let dec = pt_canonical_form(&h, &pair, &Tolerances::default()).unwrap();
        let kinds: Vec<BlockKind> = dec.blocks.iter().map(|b| b.kind).collect();
        assert_eq!(kinds, vec![BlockKind::ComplexConjugatePair(1), BlockKind::RealSimple, BlockKind::RealSimple]);
        assert!(dec.blocks[0].eigenvalue.im > 0.0);
        assert!((dec.blocks[1].eigenvalue.re + 2.0).abs() < 1e-12);
        assert!((dec.blocks[2].eigenvalue.re - 3.0).abs() < 1e-12);
        assert!(dec.similarity_residual < 1e-12);
    }
}
