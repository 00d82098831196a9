//! Random PT-symmetric instances with prescribed block structure, plus random
//! states, bases and free Kraus operators.
//!
//! A pair is built as `P = W R W⁻¹`, `T = W R conj(W)⁻¹` with `R` a real
//! diagonal of signs, so `PT = W conj(W)⁻¹`. Any `H = W M W⁻¹` with real `M`
//! is then PT-symmetric; `M = X J X⁻¹` with a real Jordan form `J`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, real_to_complex, CMatrix, CVector};
use crate::pt::{validate_pt_pair, PTPair};

/// One block of the real Jordan form used to build an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockSpec {
    Real { lambda: f64, order: usize },
    /// `a ± ib` with `b > 0`, each half of the given order.
    Pair { re: f64, im: f64, order: usize },
}

impl BlockSpec {
    pub fn size(&self) -> usize {
        match *self {
            BlockSpec::Real { order, .. } => order,
            BlockSpec::Pair { order, .. } => 2 * order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Distinct real eigenvalues only.
    Unbroken,
    /// At least one real Jordan block of order ≥ 2.
    ExceptionalPoint,
    /// At least one conjugate pair, no Jordan blocks.
    ComplexPair,
    /// Any mixture.
    Mixed,
}

#[derive(Debug, Clone)]
pub struct PtInstance {
    pub h: CMatrix,
    pub pair: PTPair,
    pub blocks: Vec<BlockSpec>,
}

impl PtInstance {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn is_unbroken(&self) -> bool {
        self.blocks.iter().all(|b| matches!(b, BlockSpec::Real { order: 1, .. }))
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Frames with a larger condition number are redrawn.
pub const MAX_FRAME_CONDITION: f64 = 8.0;

fn real_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    sv.max() / sv.min()
}

/// `I + 0.4·G/√d` with complex Gaussian `G`.
fn near_identity<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let s = 0.4 / (d as f64).sqrt();
    loop {
        let m = CMatrix::identity(d, d) + CMatrix::from_fn(d, d, |_, _| c(gaussian(rng), gaussian(rng)) * s);
        let sv = m.clone().svd(false, false).singular_values;
        if sv.max() <= MAX_FRAME_CONDITION * sv.min() {
            return m;
        }
    }
}

fn near_identity_real<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let s = 0.4 / (d as f64).sqrt();
    loop {
        let m = DMatrix::identity(d, d) + DMatrix::from_fn(d, d, |_, _| gaussian(rng) * s);
        if real_condition(&m) <= MAX_FRAME_CONDITION {
            return m;
        }
    }
}

fn frame_and_pair<R: Rng>(rng: &mut R, d: usize) -> (CMatrix, PTPair) {
    let w = near_identity(rng, d);
    let w_inv = w.clone().try_inverse().expect("near-identity frame is invertible");
    let w_bar_inv = w_inv.map(|z| z.conj());
    let signs = CMatrix::from_diagonal(&CVector::from_fn(d, |_, _| if rng.gen_bool(0.5) { c(1.0, 0.0) } else { c(-1.0, 0.0) }));
    let p = &w * &signs * &w_inv;
    let t = &w * &signs * &w_bar_inv;
    let pair = validate_pt_pair(&p, &t, 1e-8).expect("generated pair is valid");
    (w, pair)
}

pub fn random_pt_pair<R: Rng>(rng: &mut R, d: usize) -> PTPair {
    frame_and_pair(rng, d).1
}

/// Real Jordan form for the given blocks.
pub fn real_jordan_form(blocks: &[BlockSpec]) -> DMatrix<f64> {
    let d: usize = blocks.iter().map(|b| b.size()).sum();
    let mut m = DMatrix::zeros(d, d);
    let mut o = 0;
    for b in blocks {
        match *b {
            BlockSpec::Real { lambda, order } => {
                for i in 0..order {
                    m[(o + i, o + i)] = lambda;
                    if i + 1 < order {
                        m[(o + i, o + i + 1)] = 1.0;
                    }
                }
            }
            BlockSpec::Pair { re, im, order } => {
                for i in 0..order {
                    let k = o + 2 * i;
                    m[(k, k)] = re;
                    m[(k + 1, k + 1)] = re;
                    m[(k, k + 1)] = im;
                    m[(k + 1, k)] = -im;
                    if i + 1 < order {
                        m[(k, k + 2)] = 1.0;
                        m[(k + 1, k + 3)] = 1.0;
                    }
                }
            }
        }
        o += b.size();
    }
    m
}

/// Builds `H` with the given real Jordan structure under a random pair.
pub fn pt_hamiltonian_with<R: Rng>(rng: &mut R, blocks: &[BlockSpec]) -> PtInstance {
    let d: usize = blocks.iter().map(|b| b.size()).sum();
    let (w, pair) = frame_and_pair(rng, d);
    let x = near_identity_real(rng, d);
    let x_inv = x.clone().try_inverse().expect("near-identity frame is invertible");
    let m = &x * real_jordan_form(blocks) * &x_inv;
    let w_inv = w.clone().try_inverse().expect("near-identity frame is invertible");
    let h = &w * real_to_complex(&m) * &w_inv;
    PtInstance { h, pair, blocks: blocks.to_vec() }
}

/// Draws a value in `[lo, hi]` at least `gap` away from every entry of `taken`.
fn separated<R: Rng>(rng: &mut R, lo: f64, hi: f64, gap: f64, taken: &[f64]) -> f64 {
    loop {
        let v = rng.gen_range(lo..=hi);
        if taken.iter().all(|t| (t - v).abs() >= gap) {
            return v;
        }
    }
}

/// Random block layout of total size `d` for the requested kind.
pub fn random_blocks<R: Rng>(rng: &mut R, d: usize, kind: SpectrumKind) -> Vec<BlockSpec> {
    assert!(d >= 1, "dimension must be positive");
    let mut sizes: Vec<(bool, usize)> = Vec::new(); // (pair?, order)
    let mut left = d;
    match kind {
        SpectrumKind::ExceptionalPoint => {
            assert!(d >= 2, "an exceptional point needs d >= 2");
            let order = if d >= 3 && rng.gen_bool(0.2) { 3 } else { 2 };
            sizes.push((false, order));
            left -= order;
        }
        SpectrumKind::ComplexPair => {
            assert!(d >= 2, "a conjugate pair needs d >= 2");
            sizes.push((true, 1));
            left -= 2;
        }
        _ => {}
    }
    while left > 0 {
        let pick = match kind {
            SpectrumKind::Unbroken => (false, 1),
            SpectrumKind::ExceptionalPoint => {
                if left >= 2 && rng.gen_bool(0.3) {
                    (false, 2)
                } else {
                    (false, 1)
                }
            }
            SpectrumKind::ComplexPair => {
                if left >= 2 && rng.gen_bool(0.4) {
                    (true, 1)
                } else {
                    (false, 1)
                }
            }
            SpectrumKind::Mixed => {
                let roll: f64 = rng.gen();
                if left >= 2 && roll < 0.3 {
                    (true, 1)
                } else if left >= 2 && roll < 0.5 {
                    (false, 2)
                } else {
                    (false, 1)
                }
            }
        };
        left -= if pick.0 { 2 * pick.1 } else { pick.1 };
        sizes.push(pick);
    }
    sizes.shuffle(rng);

    let mut real_values: Vec<f64> = Vec::new();
    let mut pair_values: Vec<f64> = Vec::new();
    sizes
        .into_iter()
        .map(|(pair, order)| {
            if pair {
                let re = separated(rng, -2.0, 2.0, 0.2, &pair_values);
                pair_values.push(re);
                BlockSpec::Pair { re, im: rng.gen_range(0.1..=0.5), order }
            } else {
                let lambda = separated(rng, -2.0, 2.0, 0.2, &real_values);
                real_values.push(lambda);
                BlockSpec::Real { lambda, order }
            }
        })
        .collect()
}

pub fn random_pt_hamiltonian<R: Rng>(rng: &mut R, d: usize, kind: SpectrumKind) -> PtInstance {
    let blocks = random_blocks(rng, d, kind);
    pt_hamiltonian_with(rng, &blocks)
}

pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> CVector {
    CVector::from_fn(d, |_, _| c(gaussian(rng), gaussian(rng)))
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, d: usize) -> CVector {
    random_vector(rng, d).normalize()
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

/// Unit-trace density matrix of the given rank.
pub fn random_density<R: Rng>(rng: &mut R, d: usize, rank: usize) -> CMatrix {
    let g = random_matrix(rng, d, rank.clamp(1, d));
    let rho = &g * g.adjoint();
    let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    rho / c(tr, 0.0)
}

pub fn random_pure_density<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let v = random_unit_vector(rng, d);
    &v * v.adjoint()
}

/// `d` random unit vectors (linearly independent with probability one).
pub fn random_basis_vectors<R: Rng>(rng: &mut R, d: usize) -> Vec<CVector> {
    let m = near_identity(rng, d);
    m.column_iter().map(|v| v.normalize()).collect()
}

/// `Σ pᵢ|cᵢ⟩⟨cᵢ|` with random probabilities.
pub fn random_free_state<R: Rng>(rng: &mut R, basis: &[CVector]) -> CMatrix {
    let d = basis.len();
    let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = CMatrix::zeros(d, d);
    for (v, w) in basis.iter().zip(&weights) {
        rho += v * v.adjoint() * c(w / total, 0.0);
    }
    rho
}

/// `K` with `K cᵢ = μᵢ c_{π(i)}` for a random map `π` and random `μᵢ` (some zero).
pub fn random_free_kraus<R: Rng>(rng: &mut R, basis: &[CVector]) -> CMatrix {
    let d = basis.len();
    let c_mat = CMatrix::from_columns(basis);
    let images: Vec<CVector> = (0..d)
        .map(|_| {
            let target = rng.gen_range(0..d);
            let mu = if rng.gen_bool(0.15) { c(0.0, 0.0) } else { c(gaussian(rng), gaussian(rng)) };
            &basis[target] * mu
        })
        .collect();
    CMatrix::from_columns(&images) * c_mat.try_inverse().expect("basis is invertible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt::is_pt_symmetric;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_hamiltonians_are_pt_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [SpectrumKind::Unbroken, SpectrumKind::ExceptionalPoint, SpectrumKind::ComplexPair, SpectrumKind::Mixed] {
            for d in 2..=6 {
                let inst = random_pt_hamiltonian(&mut rng, d, kind);
                assert_eq!(inst.dim(), d);
                assert!(is_pt_symmetric(&inst.h, &inst.pair, 1e-10).unwrap().symmetric);
            }
        }
    }

    #[test]
    fn real_jordan_form_eigenvalues() {
        let m = real_jordan_form(&[BlockSpec::Pair { re: 1.0, im: 0.5, order: 1 }, BlockSpec::Real { lambda: -1.0, order: 2 }]);
        assert_eq!(m.nrows(), 4);
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(m[(1, 0)], -0.5);
        assert_eq!(m[(2, 3)], 1.0);
    }

    #[test]
    fn densities_have_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 4, 2);
        let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
        assert!((tr - 1.0).abs() < 1e-14);
    }
}
