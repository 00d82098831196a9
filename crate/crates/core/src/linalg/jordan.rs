//! Eigenvalue clustering and Jordan chains.
//!
//! Eigenvalues of a defective matrix are only determined to `O(ε^{1/n})`, so
//! clustering runs in two stages. Eigenvalues within `cluster_tol` are always
//! one cluster. Neighbouring clusters within `coalesce_tol` are then merged
//! when their union behaves as a single defective eigenvalue: the restricted
//! operator is numerically nilpotent about the mean, has fewer eigenvectors
//! than its dimension, and its Jordan chains reproduce it to `can_tol`.

use nalgebra::{ComplexField, DMatrix, DVector, Schur};
use num_complex::Complex64;

use super::{c, column_basis, ensure_finite, ensure_square, right_singular, spectral_norm, CMatrix, CVector};
use crate::config::Tolerances;
use crate::{Error, Result};

/// One eigenvalue cluster with its Jordan chains.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub eigenvalue: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    /// Chains ordered by length; each chain is `(ψ₁, …, ψₙ)` with
    /// `Aψ₁ = λψ₁` and `Aψₖ = λψₖ + ψₖ₋₁`.
    pub chains: Vec<Vec<CVector>>,
    /// Largest distance of a computed eigenvalue from the cluster center.
    pub spread: f64,
    /// True when the cluster was formed by merging eigenvalues farther apart
    /// than `cluster_tol` (a near-exceptional point).
    pub coalesced: bool,
}

impl EigenCluster {
    pub fn block_orders(&self) -> Vec<usize> {
        self.chains.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone)]
pub struct EigenStructure {
    pub clusters: Vec<EigenCluster>,
    /// `‖AΨ − ΨJ‖ / ‖Ψ‖` for the assembled chains.
    pub residual: f64,
}

impl EigenStructure {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.clusters.iter().map(|cl| cl.eigenvalue).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|cl| cl.algebraic).collect()
    }

    pub fn geometric_multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|cl| cl.geometric).collect()
    }

    /// Assembles `(Ψ, J)` with `AΨ ≈ ΨJ`.
    pub fn similarity(&self) -> (CMatrix, CMatrix) {
        let cols: Vec<CVector> = self.clusters.iter().flat_map(|cl| cl.chains.iter().flatten().cloned()).collect();
        let d = cols.len();
        let psi = CMatrix::from_columns(&cols);
        let mut j = CMatrix::zeros(d, d);
        let mut at = 0;
        for cl in &self.clusters {
            for chain in &cl.chains {
                let n = chain.len();
                j.view_mut((at, at), (n, n)).copy_from(&jordan_block(cl.eigenvalue, n));
                at += n;
            }
        }
        (psi, j)
    }
}

/// `J_n(λ)`: `λ` on the diagonal, ones on the superdiagonal.
pub(crate) fn jordan_block(lambda: Complex64, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// Eigen-structure with default tolerances apart from `cluster_tol`.
pub fn eigen_decompose(a: &CMatrix, cluster_tol: f64) -> Result<EigenStructure> {
    eigen_decompose_with(a, &Tolerances { cluster_tol, ..Tolerances::default() })
}

pub fn eigen_decompose_with(a: &CMatrix, tols: &Tolerances) -> Result<EigenStructure> {
    ensure_square(a)?;
    ensure_finite(a)?;
    tols.validate()?;
    let scale = spectral_norm(a).max(1.0);
    let eigs = complex_schur_eigenvalues(a)?;

    let mut accept = |members: &[usize], center: Complex64| {
        cluster_chains(a, center, members.len(), scale, tols.rank_tol)
            .map(|cc| cc.chains.len() < members.len() && cc.residual <= tols.can_tol * scale)
            .unwrap_or(false)
    };
    let groups = resolve_clusters(&eigs, None, scale, tols, &mut accept);

    let mut clusters = Vec::with_capacity(groups.len());
    let mut residual: f64 = 0.0;
    for g in groups {
        let cc = cluster_chains(a, g.center, g.members.len(), scale, tols.rank_tol)?;
        if cc.residual > tols.can_tol * scale {
            return Err(Error::IllConditioned { what: "Jordan chain construction".into(), residual: cc.residual });
        }
        residual = residual.max(cc.residual);
        let chains: Vec<Vec<CVector>> = cc
            .chains
            .into_iter()
            .map(|chain| {
                let head = &chain[0];
                let phase = leading_phase(head);
                let s = phase.conj() / head.norm();
                chain.into_iter().map(|v| v * s).collect()
            })
            .collect();
        clusters.push(EigenCluster {
            eigenvalue: g.center,
            algebraic: g.members.len(),
            geometric: chains.len(),
            chains,
            spread: g.members.iter().map(|&i| (eigs[i] - g.center).norm()).fold(0.0, f64::max),
            coalesced: g.coalesced,
        });
    }
    clusters.sort_by(|x, y| {
        x.eigenvalue
            .re
            .total_cmp(&y.eigenvalue.re)
            .then(x.eigenvalue.im.total_cmp(&y.eigenvalue.im))
    });
    let out = EigenStructure { clusters, residual };
    let (psi, j) = out.similarity();
    let achieved = spectral_norm(&(a * &psi - &psi * &j)) / spectral_norm(&psi);
    Ok(EigenStructure { residual: achieved.max(out.residual), ..out })
}

/// Unit-modulus phase of the first entry whose modulus is significant.
pub(crate) fn leading_phase(v: &CVector) -> Complex64 {
    let vmax = v.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    v.iter()
        .find(|z| z.norm() > 1e-8 * vmax)
        .map(|z| z / z.norm())
        .unwrap_or(c(1.0, 0.0))
}

fn complex_schur_eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::IllConditioned { what: "Schur iteration".into(), residual: f64::NAN })?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Eigenvalues of a real matrix from its real Schur form. Conjugate pairs are
/// produced as exact conjugates of each other.
pub(crate) fn real_schur_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::IllConditioned { what: "real Schur iteration".into(), residual: f64::NAN })?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let sub = if i + 1 < n { t[(i + 1, i)] } else { 0.0 };
        let next = (i + 1).min(n - 1);
        let negligible = sub.abs() <= f64::EPSILON * (t[(i, i)].abs() + t[(next, next)].abs());
        if i + 1 == n || negligible {
            out.push(c(t[(i, i)], 0.0));
            i += 1;
            continue;
        }
        let (p, q, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let half_tr = 0.5 * (p + s);
        let disc = 0.25 * (p - s) * (p - s) + q * r;
        if disc >= 0.0 {
            let root = disc.sqrt();
            out.push(c(half_tr + root, 0.0));
            out.push(c(half_tr - root, 0.0));
        } else {
            let root = (-disc).sqrt();
            out.push(c(half_tr, root));
            out.push(c(half_tr, -root));
        }
        i += 2;
    }
    Ok(out)
}

/// Jordan chains of one cluster, expressed in the full space.
#[derive(Debug, Clone)]
pub(crate) struct ClusterChains<T: nalgebra::Scalar> {
    pub chains: Vec<Vec<DVector<T>>>,
    /// `‖AΨ − ΨJ‖ / ‖Ψ‖` for this cluster alone.
    pub residual: f64,
}

/// Jordan chains for the eigenvalue `center` of algebraic multiplicity
/// `mult`. Works over real or complex scalars; real input with a real
/// center yields real chains.
pub(crate) fn cluster_chains<T>(
    a: &DMatrix<T>,
    center: T,
    mult: usize,
    scale: f64,
    rank_tol: f64,
) -> Result<ClusterChains<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let d = a.nrows();
    let shift = a - DMatrix::<T>::identity(d, d) * center;

    // Generalized eigenspace: the `mult` least-excited directions of shift^mult.
    let mut power = shift.clone();
    for _ in 1..mult {
        power = &power * &shift;
    }
    let (_, v) = right_singular(&power);
    let basis = v.columns(d - mult, mult).into_owned();
    let restricted = basis.adjoint() * &shift * &basis;

    // Numerical ranks of restricted^k and the kernels they leave.
    let m = mult;
    let mut ranks = vec![m];
    let mut kernels: Vec<DMatrix<T>> = vec![DMatrix::<T>::zeros(m, 0)];
    let mut pow = DMatrix::<T>::identity(m, m);
    for k in 1..=m {
        pow = &pow * &restricted;
        let (sv, vk) = right_singular(&pow);
        let thr = rank_tol * scale.powi(k as i32);
        let rank = sv.iter().filter(|&&s| s > thr).count();
        ranks.push(rank);
        kernels.push(vk.columns(rank, m - rank).into_owned());
        if rank == 0 {
            break;
        }
    }
    let index = ranks.len() - 1;
    if ranks[index] != 0 {
        let (sv, _) = right_singular(&pow);
        return Err(Error::IllConditioned {
            what: "cluster is not a single eigenvalue".into(),
            residual: sv[0] / scale.powi(m as i32),
        });
    }
    // Blocks of size ≥ k.
    let at_least: Vec<usize> = (0..=index + 1)
        .map(|k| if k == 0 || k > index { 0 } else { ranks[k - 1] - ranks[k] })
        .collect();
    for k in 1..index {
        if at_least[k] < at_least[k + 1] {
            return Err(Error::IllConditioned { what: "inconsistent Jordan structure".into(), residual: f64::NAN });
        }
    }

    let mut local: Vec<Vec<DVector<T>>> = Vec::new();
    for size in (1..=index).rev() {
        let fresh = at_least[size] - at_least[size + 1];
        if fresh == 0 {
            continue;
        }
        let mut spanned: Vec<DVector<T>> = kernels[size - 1].column_iter().map(|col| col.into_owned()).collect();
        spanned.extend(local.iter().filter(|ch| ch.len() > size).map(|ch| ch[size - 1].clone()));
        let kernel = &kernels[size];
        let complement = if spanned.is_empty() {
            kernel.clone()
        } else {
            let q = column_basis(&DMatrix::from_columns(&spanned), 1e-10);
            kernel - &q * (q.adjoint() * kernel)
        };
        let (sv, coef) = right_singular(&complement);
        if sv.len() < fresh || sv[fresh - 1] < 1e-6 {
            return Err(Error::IllConditioned {
                what: "Jordan chain selection".into(),
                residual: sv.get(fresh.saturating_sub(1)).copied().unwrap_or(0.0),
            });
        }
        for j in 0..fresh {
            let mut top = kernel * coef.column(j);
            let n = top.norm();
            top.unscale_mut(n);
            let mut chain = vec![top];
            for _ in 1..size {
                let next = &restricted * chain.last().expect("non-empty chain");
                chain.push(next);
            }
            chain.reverse();
            local.push(chain);
        }
    }
    local.sort_by_key(Vec::len);

    let chains: Vec<Vec<DVector<T>>> =
        local.into_iter().map(|ch| ch.into_iter().map(|x| &basis * x).collect()).collect();

    let cols: Vec<DVector<T>> = chains.iter().flatten().cloned().collect();
    let psi = DMatrix::from_columns(&cols);
    let mut target = &psi * center;
    let mut at = 0;
    for ch in &chains {
        for k in 1..ch.len() {
            let prev = psi.column(at + k - 1).into_owned();
            let mut col = target.column_mut(at + k);
            col += prev;
        }
        at += ch.len();
    }
    target = a * &psi - target;
    let residual = spectral_norm(&target) / spectral_norm(&psi);
    Ok(ClusterChains { chains, residual })
}

/// A resolved cluster: indices into the eigenvalue list and its center.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub members: Vec<usize>,
    pub center: Complex64,
    pub coalesced: bool,
}

/// Two-stage clustering. With `partner` (the conjugation map of an
/// eigenvalue list of a real matrix) the result is closed under conjugation
/// and self-conjugate clusters get real centers; the acceptance test is then
/// only consulted for clusters on or above the real axis.
pub(crate) fn resolve_clusters(
    eigs: &[Complex64],
    partner: Option<&[usize]>,
    scale: f64,
    tols: &Tolerances,
    accept: &mut dyn FnMut(&[usize], Complex64) -> bool,
) -> Vec<Group> {
    let singles: Vec<Vec<usize>> = (0..eigs.len()).map(|i| vec![i]).collect();
    let stage1: Vec<Vec<usize>> = link(eigs, &singles, |dist| dist <= tols.cluster_tol * scale)
        .into_iter()
        .map(|comp| comp.into_iter().flat_map(|i| singles[i].clone()).collect())
        .collect();
    let supers = link(eigs, &stage1, |dist| dist <= tols.coalesce_tol * scale);

    let mut resolver = Resolver { eigs, partner, accept };
    let mut out = Vec::new();
    for sg in supers {
        let items: Vec<Vec<usize>> = sg.into_iter().map(|i| stage1[i].clone()).collect();
        resolver.dispatch(items, &mut out);
    }
    out
}

struct Resolver<'a> {
    eigs: &'a [Complex64],
    partner: Option<&'a [usize]>,
    accept: &'a mut dyn FnMut(&[usize], Complex64) -> bool,
}

impl Resolver<'_> {
    /// Routes a connected set of stage-1 groups according to its symmetry.
    fn dispatch(&mut self, items: Vec<Vec<usize>>, out: &mut Vec<Group>) {
        let Some(partner) = self.partner else {
            out.extend(self.resolve(items));
            return;
        };
        let mut all: Vec<usize> = items.iter().flatten().copied().collect();
        all.sort_unstable();
        let mut mirrored: Vec<usize> = all.iter().map(|&i| partner[i]).collect();
        mirrored.sort_unstable();
        if all == mirrored {
            out.extend(self.resolve(items));
            return;
        }
        // Conjugate sets come in pairs; handle the upper one and mirror it.
        let mean = self.mean(&all);
        let upper = mean.im > 0.0 || (mean.im == 0.0 && all[0] < mirrored[0]);
        if !upper {
            return;
        }
        for g in self.resolve(items) {
            let twin = Group {
                members: g.members.iter().map(|&i| partner[i]).collect(),
                center: g.center.conj(),
                coalesced: g.coalesced,
            };
            out.push(g);
            out.push(twin);
        }
    }

    fn mean(&self, members: &[usize]) -> Complex64 {
        members.iter().map(|&i| self.eigs[i]).sum::<Complex64>() / members.len() as f64
    }

    fn center(&self, members: &[usize]) -> Complex64 {
        let mean = self.mean(members);
        match self.partner {
            Some(p) => {
                let mut all = members.to_vec();
                all.sort_unstable();
                let mut mirrored: Vec<usize> = all.iter().map(|&i| p[i]).collect();
                mirrored.sort_unstable();
                if all == mirrored {
                    c(mean.re, 0.0)
                } else {
                    mean
                }
            }
            None => mean,
        }
    }

    fn resolve(&mut self, items: Vec<Vec<usize>>) -> Vec<Group> {
        if items.len() == 1 {
            let members = items.into_iter().next().expect("one item");
            let center = self.center(&members);
            return vec![Group { members, center, coalesced: false }];
        }
        let union: Vec<usize> = items.iter().flatten().copied().collect();
        let center = self.center(&union);
        if (self.accept)(&union, center) {
            return vec![Group { members: union, center, coalesced: true }];
        }
        // Cut the longest edge of the minimum spanning tree and retry.
        let widest = mst_max_edge(self.eigs, &items);
        let comps = link(self.eigs, &items, |dist| dist < widest);
        let mut out = Vec::new();
        for comp in comps {
            let sub: Vec<Vec<usize>> = comp.into_iter().map(|i| items[i].clone()).collect();
            if self.partner.is_some() {
                self.dispatch(sub, &mut out);
            } else {
                out.extend(self.resolve(sub));
            }
        }
        out
    }
}

fn set_distance(eigs: &[Complex64], a: &[usize], b: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for &i in a {
        for &j in b {
            best = best.min((eigs[i] - eigs[j]).norm());
        }
    }
    best
}

/// Single-linkage components of `items`, returned as lists of item indices.
fn link(eigs: &[Complex64], items: &[Vec<usize>], joined: impl Fn(f64) -> bool) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if joined(set_distance(eigs, &items[i], &items[j])) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(slot) => comps[slot].push(i),
            None => {
                root_slot[r] = Some(comps.len());
                comps.push(vec![i]);
            }
        }
    }
    comps
}

fn mst_max_edge(eigs: &[Complex64], items: &[Vec<usize>]) -> f64 {
    let n = items.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut widest: f64 = 0.0;
    for _ in 0..n {
        let next = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&i, &j| best[i].total_cmp(&best[j]))
            .expect("remaining vertex");
        in_tree[next] = true;
        widest = widest.max(best[next]);
        for j in 0..n {
            if !in_tree[j] {
                best[j] = best[j].min(set_distance(eigs, &items[next], &items[j]));
            }
        }
    }
    widest
}

/// Conjugation partner of each eigenvalue in a list closed under exact
/// conjugation. Real entries are their own partner.
pub(crate) fn conjugate_partners(eigs: &[Complex64]) -> Result<Vec<usize>> {
    let n = eigs.len();
    let mut partner = vec![usize::MAX; n];
    for i in 0..n {
        if partner[i] != usize::MAX {
            continue;
        }
        if eigs[i].im == 0.0 {
            partner[i] = i;
            continue;
        }
        let j = (0..n)
            .find(|&j| j != i && partner[j] == usize::MAX && eigs[j] == eigs[i].conj())
            .ok_or_else(|| Error::IllConditioned { what: "unpaired complex eigenvalue".into(), residual: eigs[i].im })?;
        partner[i] = j;
        partner[j] = i;
    }
    Ok(partner)
}
