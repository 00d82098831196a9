//! The two-level family `H = [[r e^{iθ}, s], [s, r e^{-iθ}]]` with parity
//! `σₓ` and `T = I`, its eigenstates, and the Stokes-parameter reading of the
//! η-norm.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::canonical::{classify_spectrum, pt_canonical_form, BlockKind, Phase, SpectralClass};
use crate::config::Tolerances;
use crate::linalg::{c, cmatrix, spectral_norm, CMatrix, CVector};
use crate::metric::{build_metric, MetricOperator, SignCharacteristic};
use crate::pt::{validate_pt_pair, PTPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenderParams {
    pub r: f64,
    pub s: f64,
    /// Wrapped into `(−π, π]`.
    pub theta: f64,
}

impl BenderParams {
    pub fn new(r: f64, s: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && s.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidInput("Bender parameters must be finite".into()));
        }
        if r < 0.0 {
            return Err(Error::InvalidInput(format!("r must be nonnegative, got {r}")));
        }
        if r == 0.0 && s == 0.0 {
            return Err(Error::InvalidInput("r and s cannot both vanish".into()));
        }
        Ok(Self { r, s, theta: wrap_angle(theta) })
    }

    /// `s² − r² sin²θ`; positive means unbroken.
    pub fn discriminant(&self) -> f64 {
        self.s * self.s - (self.r * self.theta.sin()).powi(2)
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

pub fn sigma_x_pair() -> PTPair {
    let sx = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
    validate_pt_pair(&sx, &CMatrix::identity(2, 2), 1e-10).expect("sigma_x with T = I is a valid pair")
}

pub fn bender_hamiltonian(p: &BenderParams) -> (CMatrix, PTPair) {
    let z = Complex64::from_polar(p.r, p.theta);
    let h = CMatrix::from_row_slice(2, 2, &[z, c(p.s, 0.0), c(p.s, 0.0), z.conj()]);
    (h, sigma_x_pair())
}

/// Closed-form classification from the sign of `s² − r² sin²θ`, with `tol`
/// the half-width of the exceptional band.
pub fn bender_classify(p: &BenderParams, tol: f64) -> SpectralClass {
    let disc = p.discriminant();
    let (tag, detail) = if p.r * p.theta.sin() == 0.0 || disc > tol {
        (Phase::Unbroken, vec![BlockKind::RealSimple, BlockKind::RealSimple])
    } else if disc < -tol {
        (Phase::Broken, vec![BlockKind::ComplexConjugatePair(1)])
    } else {
        (Phase::Broken, vec![BlockKind::RealJordan(2)])
    };
    SpectralClass { tag, detail }
}

/// `Ẽ₊(α) = (e^{iα/2}, e^{-iα/2})/√2`.
pub fn e_plus_raw(alpha: f64) -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![Complex64::from_polar(h, alpha / 2.0), Complex64::from_polar(h, -alpha / 2.0)])
}

/// `Ẽ₋(α) = (i e^{-iα/2}, −i e^{iα/2})/√2`.
pub fn e_minus_raw(alpha: f64) -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![
        c(0.0, 1.0) * Complex64::from_polar(h, -alpha / 2.0),
        c(0.0, -1.0) * Complex64::from_polar(h, alpha / 2.0),
    ])
}

#[derive(Debug, Clone)]
pub struct BenderEigensystem {
    pub alpha: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub e_plus_raw: CVector,
    pub e_minus_raw: CVector,
    /// `Ẽ±/√cos α`, orthonormal for `eta`.
    pub e_plus: CVector,
    pub e_minus: CVector,
    pub eta: MetricOperator,
    /// `max ‖HẼ± − λ±Ẽ±‖`.
    pub eigen_residual: f64,
}

pub fn bender_eigensystem(p: &BenderParams, tols: &Tolerances) -> Result<BenderEigensystem> {
    if p.s == 0.0 {
        return Err(Error::BrokenRegime(f64::INFINITY));
    }
    let ratio = p.r * p.theta.sin() / p.s;
    if ratio.abs() > 1.0 {
        return Err(Error::BrokenRegime(ratio.abs()));
    }
    let alpha = ratio.asin();
    let cos_alpha = alpha.cos();
    if cos_alpha <= tols.crit_tol {
        return Err(Error::CriticalPoint(cos_alpha));
    }
    let (h, pair) = bender_hamiltonian(p);
    let lambda_plus = p.r * p.theta.cos() + p.s * cos_alpha;
    let lambda_minus = p.r * p.theta.cos() - p.s * cos_alpha;
    let e_plus_raw = e_plus_raw(alpha);
    let e_minus_raw = e_minus_raw(alpha);
    let eigen_residual = (&h * &e_plus_raw - &e_plus_raw * c(lambda_plus, 0.0))
        .norm()
        .max((&h * &e_minus_raw - &e_minus_raw * c(lambda_minus, 0.0)).norm());
    let scale = spectral_norm(&h).max(1.0);
    if eigen_residual > 1e-10 * scale {
        return Err(Error::IllConditioned { what: "Bender eigenstates".into(), residual: eigen_residual });
    }

    let decomp = pt_canonical_form(&h, &pair, tols)?;
    if decomp.blocks.iter().any(|b| b.kind != BlockKind::RealSimple) {
        return Err(Error::CriticalPoint(cos_alpha));
    }
    let norm = cos_alpha.sqrt();
    let scales: Vec<f64> = (0..2)
        .map(|i| {
            let col = decomp.basis_vector(i);
            let lambda = decomp.j[(i, i)].re;
            let target = if (lambda - lambda_plus).abs() <= (lambda - lambda_minus).abs() { &e_plus_raw } else { &e_minus_raw };
            let sign = target.dotc(&col).re.signum();
            sign / norm
        })
        .collect();
    let decomp = decomp.with_column_scales(&scales, &h, &pair)?;
    let eta = build_metric(&decomp, &SignCharacteristic::all_positive(2))?;
    let inv = c(1.0 / norm, 0.0);
    Ok(BenderEigensystem {
        alpha,
        lambda_plus,
        lambda_minus,
        e_plus: &e_plus_raw * inv,
        e_minus: &e_minus_raw * inv,
        e_plus_raw,
        e_minus_raw,
        eta,
        eigen_residual,
    })
}

fn check_critical(alpha: f64, crit_tol: f64) -> Result<f64> {
    let cos_alpha = alpha.cos();
    if !(cos_alpha > crit_tol) {
        return Err(Error::CriticalPoint(cos_alpha));
    }
    Ok(cos_alpha)
}

/// Coefficients of `(x, y) = c₁E₊(α) + c₂E₋(α)`.
pub fn expansion_coefficients(x: Complex64, y: Complex64, alpha: f64, crit_tol: f64) -> Result<(Complex64, Complex64)> {
    let cos_alpha = check_critical(alpha, crit_tol)?;
    let front = (2.0 * cos_alpha).sqrt();
    let denom = Complex64::from_polar(1.0, alpha) + Complex64::from_polar(1.0, -alpha);
    let half = Complex64::from_polar(1.0, alpha / 2.0);
    let c1 = (x * half + y * half.conj()) * front / denom;
    let c2 = c(0.0, -1.0) * (x * half.conj() - y * half) * front / denom;
    Ok((c1, c2))
}

/// `(|x|² + |y|² + i(xȳ − yx̄) sin α) / cos α`.
pub fn s0_eta(x: Complex64, y: Complex64, alpha: f64, crit_tol: f64) -> Result<f64> {
    let cos_alpha = check_critical(alpha, crit_tol)?;
    let cross = c(0.0, 1.0) * (x * y.conj() - y * x.conj());
    Ok((x.norm_sqr() + y.norm_sqr() + cross.re * alpha.sin()) / cos_alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    /// `S₀² − S₁² − S₂² − S₃²`, zero for a pure field.
    pub fn defect(&self) -> f64 {
        self.s0 * self.s0 - self.s1 * self.s1 - self.s2 * self.s2 - self.s3 * self.s3
    }
}

/// Stokes parameters with `S₃ = i(E_x Ē_y − E_y Ē_x)`.
pub fn stokes_vector(ex: Complex64, ey: Complex64) -> StokesVector {
    let cross = ex * ey.conj();
    StokesVector {
        s0: ex.norm_sqr() + ey.norm_sqr(),
        s1: ex.norm_sqr() - ey.norm_sqr(),
        s2: (cross + cross.conj()).re,
        s3: (c(0.0, 1.0) * (cross - cross.conj())).re,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    /// `Unbroken`, `EP`, `ComplexPair` or `Broken`; `None` if classification failed.
    pub class: Option<&'static str>,
    pub alpha: Option<f64>,
    pub s0: Option<f64>,
    pub s0_times_cos_alpha: Option<f64>,
    /// `|⟨Ẽ₊|Ẽ₋⟩|`.
    pub eigvec_overlap: Option<f64>,
    pub error: Option<String>,
}

/// One row per `θ` (sorted ascending); failures are recorded in the row.
pub fn critical_sweep(r: f64, s: f64, thetas: &[f64], probe: (Complex64, Complex64), tols: &Tolerances) -> Result<Vec<SweepRow>> {
    if s == 0.0 {
        return Err(Error::InvalidInput("s must be nonzero for a sweep".into()));
    }
    let mut sorted = thetas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(sorted.len());
    for theta in sorted {
        let mut row = SweepRow { theta, class: None, alpha: None, s0: None, s0_times_cos_alpha: None, eigvec_overlap: None, error: None };
        let p = match BenderParams::new(r, s, theta) {
            Ok(p) => p,
            Err(e) => {
                row.error = Some(e.to_string());
                rows.push(row);
                continue;
            }
        };
        let (h, pair) = bender_hamiltonian(&p);
        match classify_spectrum(&h, &pair, tols.cluster_tol) {
            Ok(class) => row.class = Some(class.label()),
            Err(e) => row.error = Some(e.to_string()),
        }
        let ratio = r * p.theta.sin() / s;
        if ratio.abs() <= 1.0 {
            let alpha = ratio.asin();
            row.alpha = Some(alpha);
            row.eigvec_overlap = Some(e_plus_raw(alpha).dotc(&e_minus_raw(alpha)).norm());
            match s0_eta(probe.0, probe.1, alpha, tols.crit_tol) {
                Ok(v) => {
                    row.s0 = Some(v);
                    row.s0_times_cos_alpha = Some(v * alpha.cos());
                }
                Err(e) => {
                    row.error.get_or_insert_with(|| e.to_string());
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
