//! Property tests for the structural identities each module promises.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptsym_core::bender::{expansion_coefficients, s0_eta};
use ptsym_core::canonical::{classify_spectrum, pt_canonical_form, CanonicalDecomposition};
use ptsym_core::config::Tolerances;
use ptsym_core::dynamics::{evolve_density, invariant_report, propagator, TimeGrid};
use ptsym_core::linalg::{c, eigen_decompose, matrix_exponential, operator_norm, CMatrix, CVector};
use ptsym_core::metric::{basis_coefficients, build_metric, eta_inner, eta_trace, inertia, SignCharacteristic};
use ptsym_core::pt::{apply_antilinear, is_pt_symmetric};
use ptsym_core::sample::{
    random_basis_vectors, random_density, random_free_kraus, random_free_state, random_matrix, random_pt_hamiltonian,
    random_pt_pair, random_unit_vector, random_vector, BlockSpec, PtInstance, SpectrumKind,
};
use ptsym_core::superposition::{is_free_kraus, is_incoherent, is_superposition_free, kraus_completion, FreeBasis};

const KINDS: [SpectrumKind; 4] =
    [SpectrumKind::Unbroken, SpectrumKind::ExceptionalPoint, SpectrumKind::ComplexPair, SpectrumKind::Mixed];

fn instance(seed: u64, d: usize, k: usize) -> (ChaCha8Rng, PtInstance) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_pt_hamiltonian(&mut rng, d, KINDS[k]);
    (rng, inst)
}

fn decompose(inst: &PtInstance) -> CanonicalDecomposition {
    pt_canonical_form(&inst.h, &inst.pair, &Tolerances::default()).expect("generated instances decompose")
}

fn taylor(a: &CMatrix, z: Complex64) -> CMatrix {
    let n = a.nrows();
    let za = a * z;
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..60 {
        term = &term * &za / c(k as f64, 0.0);
        sum += &term;
    }
    sum
}

fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn truth_eigenvalues(blocks: &[BlockSpec]) -> Vec<Complex64> {
    let mut out = Vec::new();
    for b in blocks {
        match *b {
            BlockSpec::Real { lambda, order } => out.extend(std::iter::repeat_n(c(lambda, 0.0), order)),
            BlockSpec::Pair { re, im, order } => {
                out.extend(std::iter::repeat_n(c(re, im), order));
                out.extend(std::iter::repeat_n(c(re, -im), order));
            }
        }
    }
    sorted(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn expm_matches_taylor(seed in any::<u64>(), d in 1usize..=6, norm in 0.0f64..=5.0, phase in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_matrix(&mut rng, d, d);
        let a = &g * c(norm / operator_norm(&g).unwrap(), 0.0);
        let z = Complex64::from_polar(1.0, phase);
        prop_assert!((matrix_exponential(&a, z).unwrap() - taylor(&a, z)).norm() <= 1e-9);
    }

    #[test]
    fn expm_is_additive(seed in any::<u64>(), d in 1usize..=6, z in (-1.0f64..1.0, -1.0f64..1.0), w in (-1.0f64..1.0, -1.0f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, d, d);
        let (z, w) = (c(z.0, z.1), c(w.0, w.1));
        let lhs = matrix_exponential(&a, z).unwrap() * matrix_exponential(&a, w).unwrap();
        let rhs = matrix_exponential(&a, z + w).unwrap();
        prop_assert!((&lhs - &rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
    }

    #[test]
    fn unitary_has_unit_norm(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_matrix(&mut rng, d, d).qr().q();
        prop_assert!((operator_norm(&q).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn eigen_reconstruction(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, d, d);
        let es = eigen_decompose(&a, 1e-8).unwrap();
        let (psi, j) = es.similarity();
        prop_assert!((&a * &psi - &psi * &j).norm() <= 1e-8 * operator_norm(&a).unwrap());
        prop_assert_eq!(es.multiplicities().iter().sum::<usize>(), d);
        prop_assert!(es.clusters.iter().all(|cl| cl.geometric <= cl.algebraic));
    }

    #[test]
    fn antilinear_is_an_involution(seed in any::<u64>(), d in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = random_pt_pair(&mut rng, d);
        for _ in 0..5 {
            let v = random_vector(&mut rng, d);
            let back = apply_antilinear(&pair, &apply_antilinear(&pair, &v).unwrap()).unwrap();
            prop_assert!((back - &v).norm() <= 1e-10 * v.norm().max(1.0));
        }
    }

    #[test]
    fn symmetry_survives_real_shifts(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4, shift in -5.0f64..5.0) {
        let (_, inst) = instance(seed, d, k);
        let shifted = &inst.h + CMatrix::identity(d, d) * c(shift, 0.0);
        prop_assert!(is_pt_symmetric(&shifted, &inst.pair, 1e-10).unwrap().symmetric);
    }

    #[test]
    fn spectrum_is_closed_under_conjugation(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4) {
        let (_, inst) = instance(seed, d, k);
        let es = eigen_decompose(&inst.h, 1e-8).unwrap();
        let eigs = es.eigenvalues();
        for (lam, m) in eigs.iter().zip(es.multiplicities()) {
            let partner: usize = eigs.iter().zip(es.multiplicities())
                .filter(|(mu, _)| (*mu - lam.conj()).norm() <= 1e-6)
                .map(|(_, n)| n)
                .sum();
            prop_assert_eq!(partner, m);
        }
    }

    #[test]
    fn canonical_round_trip(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4) {
        let (_, inst) = instance(seed, d, k);
        let dec = decompose(&inst);
        let back = &dec.psi * &dec.j * &dec.psi_inv;
        prop_assert!((back - &inst.h).norm() <= 1e-8 * operator_norm(&inst.h).unwrap().max(1.0));
        prop_assert_eq!(&dec.k * conj(&dec.k), CMatrix::identity(d, d));
        let pt_psi = inst.pair.product() * conj(&dec.psi);
        prop_assert!((pt_psi - &dec.psi * &dec.k).norm() <= 1e-8 * operator_norm(&dec.psi).unwrap());
    }

    #[test]
    fn unbroken_iff_real_diagonal_j(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4) {
        let (_, inst) = instance(seed, d, k);
        let dec = decompose(&inst);
        let unbroken = classify_spectrum(&inst.h, &inst.pair, 1e-8).unwrap().is_unbroken();
        let diagonal_real = (0..d).all(|i| (0..d).all(|j| {
            let z = dec.j[(i, j)];
            if i == j { z.im.abs() <= 1e-8 } else { z.norm() <= 1e-8 }
        }));
        prop_assert_eq!(unbroken, diagonal_real);
        prop_assert_eq!(unbroken, inst.is_unbroken());
    }

    #[test]
    fn j_carries_the_spectrum(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4) {
        let (_, inst) = instance(seed, d, k);
        let dec = decompose(&inst);
        let got = sorted(dec.column_eigenvalues());
        let want = truth_eigenvalues(&inst.blocks);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).norm() <= 1e-6, "{g} vs {w}");
        }
    }

    #[test]
    fn metric_inertia_matches_sign_matrix(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4, flips in any::<u8>()) {
        let (_, inst) = instance(seed, d, k);
        let dec = decompose(&inst);
        let eps: Vec<i8> = (0..dec.real_block_count()).map(|i| if flips >> (i % 8) & 1 == 1 { -1 } else { 1 }).collect();
        let metric = build_metric(&dec, &SignCharacteristic::new(eps).unwrap()).unwrap();
        prop_assert_eq!(inertia(&metric.eta), inertia(&metric.s));
        let eta_norm = operator_norm(&metric.eta).unwrap();
        let residual = (inst.h.adjoint() * &metric.eta - &metric.eta * &inst.h).norm();
        prop_assert!(residual <= 1e-8 * eta_norm * operator_norm(&inst.h).unwrap().max(1.0));
    }

    #[test]
    fn eta_trace_is_sign_weighted_coefficients(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4) {
        let (mut rng, inst) = instance(seed, d, k);
        let dec = decompose(&inst);
        let metric = build_metric(&dec, &SignCharacteristic::default_for(&dec)).unwrap();
        let rho = random_density(&mut rng, d, d);
        let r = basis_coefficients(&rho, &dec).unwrap();
        let lhs = eta_trace(&rho, &metric.eta).unwrap();
        let rhs = (&metric.s * &r.r).trace();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        prop_assert!((&dec.psi * &r.r * dec.psi.adjoint() - &rho).norm() <= 1e-9);
    }

    #[test]
    fn eta_inner_is_sesquilinear(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4, a in (-2.0f64..2.0, -2.0f64..2.0)) {
        let (mut rng, inst) = instance(seed, d, k);
        let dec = decompose(&inst);
        let eta = build_metric(&dec, &SignCharacteristic::default_for(&dec)).unwrap().eta;
        let (x, y, z) = (random_vector(&mut rng, d), random_vector(&mut rng, d), random_vector(&mut rng, d));
        let a = c(a.0, a.1);
        let f = |u: &CVector, v: &CVector| eta_inner(u, v, &eta).unwrap();
        let tol = 1e-10 * operator_norm(&eta).unwrap().max(1.0) * 100.0;
        prop_assert!((f(&x, &(&y * a + &z)) - (f(&x, &y) * a + f(&x, &z))).norm() <= tol);
        prop_assert!((f(&(&y * a + &z), &x) - (f(&y, &x) * a.conj() + f(&z, &x))).norm() <= tol);
        prop_assert!((f(&x, &y) - f(&y, &x).conj()).norm() <= tol);
    }

    #[test]
    fn eta_trace_is_conserved(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4) {
        let (mut rng, inst) = instance(seed, d, k);
        let rho = random_density(&mut rng, d, 1 + (seed as usize) % d);
        let grid = TimeGrid::new(0.0, 10.0, 41).unwrap();
        let rep = invariant_report(&inst.h, &inst.pair, &rho, &grid, None, &Tolerances::default()).unwrap();
        prop_assert!(rep.eta_trace_drift() <= 1e-8);
        for inv in &rep.invariants {
            prop_assert!(inv.drift <= 1e-8, "{} drifted by {:e}", inv.name, inv.drift);
        }
    }

    #[test]
    fn unbroken_off_diagonal_rotates(seed in any::<u64>()) {
        let (mut rng, inst) = instance(seed, 2, 0);
        let rho = random_density(&mut rng, 2, 1);
        let rep = invariant_report(&inst.h, &inst.pair, &rho, &TimeGrid::default(), None, &Tolerances::default()).unwrap();
        let lam = rep.decomposition().column_eigenvalues();
        let r0 = rep.coefficient_series[0].get(0, 1);
        for (t, r) in rep.times.iter().zip(&rep.coefficient_series) {
            let expected = r0 * Complex64::from_polar(1.0, t * (lam[1].re - lam[0].re));
            prop_assert!((r.get(0, 1) - expected).norm() <= 1e-8);
        }
    }

    #[test]
    fn pair_populations_grow_and_decay(seed in any::<u64>()) {
        let (mut rng, inst) = instance(seed, 2, 2);
        let rho = random_density(&mut rng, 2, 2);
        let rep = invariant_report(&inst.h, &inst.pair, &rho, &TimeGrid::default(), None, &Tolerances::default()).unwrap();
        let b = rep.decomposition().blocks[0].eigenvalue.im;
        let r0 = &rep.coefficient_series[0];
        for (t, r) in rep.times.iter().zip(&rep.coefficient_series) {
            let up = r0.get(0, 0).re * (2.0 * b * t).exp();
            let down = r0.get(1, 1).re * (-2.0 * b * t).exp();
            prop_assert!((r.get(0, 0).re - up).abs() <= 1e-6 * up);
            prop_assert!((r.get(1, 1).re - down).abs() <= 1e-6 * down);
        }
    }

    #[test]
    fn evolution_is_a_group(seed in any::<u64>(), d in 2usize..=6, k in 0usize..4, s in 0.0f64..5.0, t in 0.0f64..5.0) {
        let (mut rng, inst) = instance(seed, d, k);
        let rho = random_density(&mut rng, d, d);
        let two_step = evolve_density(&evolve_density(&rho, &inst.h, s).unwrap(), &inst.h, t).unwrap();
        let one_step = evolve_density(&rho, &inst.h, s + t).unwrap();
        prop_assert!((&two_step - &one_step).norm() <= 1e-9 * one_step.norm().max(1.0));
    }

    #[test]
    fn free_and_incoherent_agree_on_orthonormal_bases(seed in any::<u64>(), d in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_matrix(&mut rng, d, d).qr().q();
        let basis = FreeBasis::from_columns(&q, 1e-10).unwrap();
        let vectors: Vec<CVector> = (0..d).map(|i| basis.vector(i)).collect();
        let diagonal = random_free_state(&mut rng, &vectors);
        let general = random_density(&mut rng, d, d);
        for rho in [diagonal, general] {
            let (a, _) = is_superposition_free(&rho, &basis, 1e-9).unwrap();
            let (b, _) = is_incoherent(&rho, &basis, 1e-9).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn free_operations_preserve_free_states(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = random_basis_vectors(&mut rng, d);
        let basis = FreeBasis::new(&vectors, 1e-10).unwrap();
        let k = random_free_kraus(&mut rng, &vectors);
        prop_assert!(is_free_kraus(&k, &basis, 1e-8));
        let rho = random_free_state(&mut rng, &vectors);
        let (free, dec) = is_superposition_free(&rho, &basis, 1e-9).unwrap();
        prop_assert!(free);
        prop_assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let out = &k * &rho * k.adjoint();
        let tr = out.trace().re;
        prop_assume!(tr > 1e-8);
        let (free, _) = is_superposition_free(&(out / c(tr, 0.0)), &basis, 1e-8).unwrap();
        prop_assert!(free);
    }

    #[test]
    fn kraus_completion_sums_to_identity(seed in any::<u64>(), d in 2usize..=5, t in 0.0f64..10.0) {
        let (_, inst) = instance(seed, d, 0);
        let dec = decompose(&inst);
        let cb = ptsym_core::dilation::uniform_bound(&dec).unwrap();
        let k = propagator(&inst.h, t).unwrap() * c(cb, 0.0);
        let f = kraus_completion(&k).unwrap();
        prop_assert!((f.adjoint() * &f + k.adjoint() * &k - CMatrix::identity(d, d)).norm() <= 1e-9);
    }

    #[test]
    fn s0_dual_route(x in (-1.0f64..1.0, -1.0f64..1.0), y in (-1.0f64..1.0, -1.0f64..1.0), alpha in -1.52f64..1.52) {
        let (x, y) = (c(x.0, x.1), c(y.0, y.1));
        let (c1, c2) = expansion_coefficients(x, y, alpha, 1e-6).unwrap();
        prop_assert!((s0_eta(x, y, alpha, 1e-6).unwrap() - c1.norm_sqr() - c2.norm_sqr()).abs() <= 1e-10);
        let k = 1.0 / alpha.cos().sqrt();
        let back = ptsym_core::bender::e_plus_raw(alpha) * (c1 * k) + ptsym_core::bender::e_minus_raw(alpha) * (c2 * k);
        prop_assert!((back[0] - x).norm() <= 1e-10 && (back[1] - y).norm() <= 1e-10);
    }

    #[test]
    fn stokes_pure_field_identity(ex in (-3.0f64..3.0, -3.0f64..3.0), ey in (-3.0f64..3.0, -3.0f64..3.0)) {
        let s = ptsym_core::bender::stokes_vector(c(ex.0, ex.1), c(ey.0, ey.1));
        prop_assert!(s.defect().abs() <= 1e-10 * s.s0.max(1.0).powi(2));
    }
}

#[test]
fn positivity_matches_classification_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        let d = rng.gen_range(2..=6);
        let inst = random_pt_hamiltonian(&mut rng, d, KINDS[i % 4]);
        let dec = decompose(&inst);
        let metric = build_metric(&dec, &SignCharacteristic::default_for(&dec)).unwrap();
        assert_eq!(metric.positive_definite, dec.spectral_class().is_unbroken());
    }
}

#[test]
fn unit_vectors_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!((random_unit_vector(&mut rng, 5).norm() - 1.0).abs() < 1e-15);
}
