//! Time evolution `ρ(t) = U(t)ρU†(t)` with `U(t) = e^{-itH}`, and tracking of
//! the quantities it conserves.

use num_complex::Complex64;

use crate::canonical::{pt_canonical_form, BlockKind, CanonicalDecomposition, SpectralClass};
use crate::config::Tolerances;
use crate::linalg::{
    c, check_hermitian, ensure_dim, ensure_finite, ensure_square, hermitian_eigenvalues, matrix_exponential,
    spectral_norm, trace, unit_scale, CMatrix,
};
use crate::metric::{basis_coefficients, build_metric, eta_trace, CoefficientMatrix, MetricOperator, SignCharacteristic};
use crate::pt::PTPair;
use crate::{Error, Result};

/// Beyond `t·max(1,‖H‖)` of this size broken-case populations may overflow.
pub const OVERFLOW_HORIZON: f64 = 30.0;

/// Uniformly spaced times. A single point is allowed and means `t_start` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub num_points: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_start: 0.0, t_end: 10.0, num_points: 201 }
    }
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, num_points: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidInput("time grid bounds must be finite".into()));
        }
        if num_points == 0 {
            return Err(Error::InvalidInput("time grid needs at least one point".into()));
        }
        if num_points >= 2 && t_end <= t_start {
            return Err(Error::InvalidInput(format!("time grid end {t_end} must exceed start {t_start}")));
        }
        Ok(Self { t_start, t_end, num_points })
    }

    pub fn times(&self) -> Vec<f64> {
        if self.num_points == 1 {
            return vec![self.t_start];
        }
        let step = (self.t_end - self.t_start) / (self.num_points - 1) as f64;
        (0..self.num_points)
            .map(|k| if k + 1 == self.num_points { self.t_end } else { self.t_start + step * k as f64 })
            .collect()
    }

    pub fn last(&self) -> f64 {
        if self.num_points == 1 {
            self.t_start
        } else {
            self.t_end
        }
    }
}

/// `e^{-itH}`.
pub fn propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    matrix_exponential(h, c(0.0, -t))
}

/// Checks that `ρ` is Hermitian, positive semidefinite and has positive trace.
pub fn validate_density(rho: &CMatrix) -> Result<()> {
    ensure_square(rho)?;
    ensure_finite(rho)?;
    check_hermitian(rho, 1e-10).map_err(|_| Error::InvalidDensity("not Hermitian".into()))?;
    let values = hermitian_eigenvalues(rho);
    if values[0] < -1e-10 * unit_scale(rho) {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {:e}", values[0])));
    }
    if trace(rho).re <= 1e-12 {
        return Err(Error::InvalidDensity("trace is not positive".into()));
    }
    Ok(())
}

/// `U(t)ρU†(t)`, not renormalized.
pub fn evolve_density(rho: &CMatrix, h: &CMatrix, t: f64) -> Result<CMatrix> {
    let d = ensure_square(h)?;
    ensure_dim(d, ensure_square(rho)?)?;
    validate_density(rho)?;
    let u = propagator(h, t)?;
    Ok(&u * rho * u.adjoint())
}

/// `ρ / Tr ρ`.
pub fn normalize(rho: &CMatrix) -> Result<CMatrix> {
    ensure_square(rho)?;
    let tr = trace(rho);
    if tr.norm() < 1e-12 {
        return Err(Error::TraceTooSmall(tr.norm()));
    }
    Ok(rho / tr)
}

/// A conserved combination of coefficients and its values over the grid.
#[derive(Debug, Clone)]
pub struct TrackedInvariant {
    pub name: String,
    pub values: Vec<Complex64>,
    /// `max_t |v(t) − v(t₀)|`.
    pub drift: f64,
}

#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub times: Vec<f64>,
    pub coefficient_series: Vec<CoefficientMatrix>,
    pub eta_trace_series: Vec<Complex64>,
    pub class: SpectralClass,
    /// Block-wise invariants followed by `Tr(eta rho)`.
    pub invariants: Vec<TrackedInvariant>,
    pub metric: MetricOperator,
    pub overflow_risk: bool,
    /// Largest time for which broken-case growth is considered safe.
    pub usable_horizon: f64,
}

impl InvariantReport {
    pub fn invariant(&self, name: &str) -> Option<&TrackedInvariant> {
        self.invariants.iter().find(|i| i.name == name)
    }

    pub fn eta_trace_drift(&self) -> f64 {
        drift(&self.eta_trace_series)
    }

    pub fn decomposition(&self) -> &CanonicalDecomposition {
        &self.metric.decomposition
    }
}

/// Label of coefficient `R_{ij}` with 1-based indices.
pub fn coefficient_name(i: usize, j: usize) -> String {
    if i < 9 && j < 9 {
        format!("R{}{}", i + 1, j + 1)
    } else {
        format!("R{},{}", i + 1, j + 1)
    }
}

/// Index pairs whose coefficient sums are conserved, per block.
pub fn invariant_terms(decomp: &CanonicalDecomposition) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for b in &decomp.blocks {
        let o = b.offset;
        match b.kind {
            BlockKind::RealSimple => out.push(vec![(o, o)]),
            BlockKind::RealJordan(n) => out.push((0..n).map(|k| (o + k, o + n - 1 - k)).collect()),
            BlockKind::ComplexConjugatePair(n) => {
                out.push((0..n).map(|k| (o + n - 1 - k, o + n + k)).collect());
                out.push((0..n).map(|k| (o + 2 * n - 1 - k, o + k)).collect());
            }
        }
    }
    out
}

pub fn invariant_report(
    h: &CMatrix,
    pair: &PTPair,
    rho: &CMatrix,
    grid: &TimeGrid,
    signs: Option<&SignCharacteristic>,
    tols: &Tolerances,
) -> Result<InvariantReport> {
    let d = ensure_square(h)?;
    ensure_dim(d, ensure_square(rho)?)?;
    validate_density(rho)?;
    let decomp = pt_canonical_form(h, pair, tols)?;
    let signs = signs.cloned().unwrap_or_else(|| SignCharacteristic::default_for(&decomp));
    let metric = build_metric(&decomp, &signs)?;

    // Coefficients are propagated in the canonical frame, where each entry
    // keeps relative accuracy even when populations grow like e^{2t Im λ}.
    // Tr(ηρ) is taken from the lab-frame state as an independent route.
    let h_frame = &decomp.psi_inv * h * &decomp.psi;
    let r0 = basis_coefficients(rho, &decomp)?.r;
    let times = grid.times();
    let mut coefficient_series = Vec::with_capacity(times.len());
    let mut eta_trace_series = Vec::with_capacity(times.len());
    for &t in &times {
        let m = propagator(&h_frame, t)?;
        coefficient_series.push(CoefficientMatrix { r: &m * &r0 * m.adjoint() });
        let u = propagator(h, t)?;
        let rho_t = &u * rho * u.adjoint();
        eta_trace_series.push(eta_trace(&rho_t, &metric.eta)?);
    }

    let mut invariants: Vec<TrackedInvariant> = invariant_terms(&decomp)
        .into_iter()
        .map(|terms| {
            let name = terms.iter().map(|&(i, j)| coefficient_name(i, j)).collect::<Vec<_>>().join("+");
            let values: Vec<Complex64> = coefficient_series
                .iter()
                .map(|r| terms.iter().map(|&(i, j)| r.get(i, j)).sum())
                .collect();
            TrackedInvariant { drift: drift(&values), name, values }
        })
        .collect();
    invariants.push(TrackedInvariant {
        name: "Tr(eta rho)".into(),
        drift: drift(&eta_trace_series),
        values: eta_trace_series.clone(),
    });

    let class = decomp.spectral_class();
    let scale = spectral_norm(h).max(1.0);
    let cap = OVERFLOW_HORIZON / scale;
    let extent = grid.last().abs().max(grid.t_start.abs());
    let overflow_risk = !class.is_unbroken() && extent > cap;
    let usable_horizon = if overflow_risk { cap } else { extent };

    Ok(InvariantReport {
        times,
        coefficient_series,
        eta_trace_series,
        class,
        invariants,
        metric,
        overflow_risk,
        usable_horizon,
    })
}

fn drift(values: &[Complex64]) -> f64 {
    values.first().map_or(0.0, |v0| values.iter().map(|v| (v - v0).norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cmatrix;
    use crate::pt::validate_pt_pair;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    fn bender(r: f64, s: f64, theta: f64) -> (CMatrix, PTPair) {
        let h = cmatrix(
            2,
            2,
            &[(r * theta.cos(), r * theta.sin()), (s, 0.0), (s, 0.0), (r * theta.cos(), -r * theta.sin())],
        );
        let sx = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        (h, validate_pt_pair(&sx, &CMatrix::identity(2, 2), 1e-10).unwrap())
    }

    #[test]
    fn grid_spacing() {
        let g = TimeGrid::default();
        let t = g.times();
        assert_eq!(t.len(), 201);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[200], 10.0);
        assert!((t[1] - 0.05).abs() < 1e-15);
        assert_eq!(TimeGrid::new(2.0, 2.0, 1).unwrap().times(), vec![2.0]);
        assert!(TimeGrid::new(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn propagator_at_ep_frame() {
        let a = 0.3;
        let j = cmatrix(2, 2, &[(a, 0.0), (1.0, 0.0), (0.0, 0.0), (a, 0.0)]);
        let t = 2.5;
        let u = propagator(&j, t).unwrap();
        let phase = Complex64::from_polar(1.0, -t * a);
        let expected = cmatrix(2, 2, &[(1.0, 0.0), (0.0, -t), (0.0, 0.0), (1.0, 0.0)]) * phase;
        assert!((u - expected).norm() < 1e-12);
    }

    #[test]
    fn density_validation() {
        let bad = cmatrix(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-0.5, 0.0)]);
        assert!(matches!(evolve_density(&bad, &CMatrix::identity(2, 2), 1.0), Err(Error::InvalidDensity(_))));
        assert!(matches!(normalize(&CMatrix::zeros(2, 2)), Err(Error::TraceTooSmall(_))));
    }

    #[test]
    fn unbroken_invariants() {
        let (h, pair) = bender(1.0, 1.0, FRAC_PI_6);
        let rho = cmatrix(2, 2, &[(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)]);
        let rep = invariant_report(&h, &pair, &rho, &TimeGrid::default(), None, &Tolerances::default()).unwrap();
        let names: Vec<&str> = rep.invariants.iter().map(|i| i.name.as_str()).collect();
        assert_eq!(names, vec!["R11", "R22", "Tr(eta rho)"]);
        assert!(rep.invariants.iter().all(|i| i.drift <= 1e-8));
        assert!(!rep.overflow_risk);
    }

    #[test]
    fn ep_off_diagonal_shift() {
        let (h, pair) = bender(1.0, 1.0, FRAC_PI_2);
        let dec = pt_canonical_form(&h, &pair, &Tolerances::default()).unwrap();
        let v = dec.basis_vector(1);
        let rho = &v * v.adjoint();
        let rep = invariant_report(&h, &pair, &rho, &TimeGrid::default(), None, &Tolerances::default()).unwrap();
        assert_eq!(rep.invariants[0].name, "R12+R21");
        assert!(rep.invariants[0].drift <= 1e-8);
        for (t, r) in rep.times.iter().zip(&rep.coefficient_series) {
            assert!((r.get(0, 1) - c(0.0, -t)).norm() < 1e-9);
            assert!((r.get(1, 0) - c(0.0, *t)).norm() < 1e-9);
        }
    }

    #[test]
    fn broken_pair_off_diagonals_constant() {
        let (h, pair) = bender(1.0, 0.5, FRAC_PI_2);
        let dec = pt_canonical_form(&h, &pair, &Tolerances::default()).unwrap();
        let xi = (dec.basis_vector(0) + dec.basis_vector(1)).normalize();
        let rho = &xi * xi.adjoint();
        let rep = invariant_report(&h, &pair, &rho, &TimeGrid::default(), None, &Tolerances::default()).unwrap();
        assert_eq!(rep.invariants[0].name, "R12");
        assert_eq!(rep.invariants[1].name, "R21");
        assert!(rep.invariants.iter().all(|i| i.drift <= 1e-8), "{:?}", rep.invariants.iter().map(|i| i.drift).collect::<Vec<_>>());
        let b = 3f64.sqrt() / 2.0;
        let r0 = rep.coefficient_series[0].get(0, 0).re;
        let last = rep.coefficient_series.last().unwrap().get(0, 0).re;
        assert!((last / r0 / (2.0 * b * 10.0).exp() - 1.0).abs() < 1e-6);
    }
}
