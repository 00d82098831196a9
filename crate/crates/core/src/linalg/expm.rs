//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005 parameters).

use super::{c, ensure_finite, ensure_square, CMatrix};
use crate::{Error, Result};
use num_complex::Complex64;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the [13/13] approximant meets double precision.
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Computes `e^{zA}`.
pub fn matrix_exponential(a: &CMatrix, z: Complex64) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite exponent scale".into()));
    }
    let za = a * z;
    let norm = one_norm(&za);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = &za * c(2f64.powi(-squarings), 0.0);

    let id = CMatrix::identity(n, n);
    let b = |k: usize| c(PADE13[k], 0.0);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::IllConditioned { what: "Padé denominator".into(), residual: f64::INFINITY })?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    ensure_finite(&result).map_err(|_| Error::IllConditioned {
        what: "matrix exponential overflow".into(),
        residual: f64::INFINITY,
    })?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cmatrix;

    /// Truncated Taylor series with scaling and squaring, an independent route.
    fn taylor_exp(a: &CMatrix, z: Complex64, terms: usize) -> CMatrix {
        let n = a.nrows();
        let za = a * z;
        let mut sq = 0;
        let mut scaled = za.clone();
        while one_norm(&scaled) > 0.5 {
            scaled *= c(0.5, 0.0);
            sq += 1;
        }
        let mut sum = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * &scaled * c(1.0 / k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..sq {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = matrix_exponential(&CMatrix::zeros(3, 3), c(0.3, -2.0)).unwrap();
        assert!((e - CMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_exponential() {
        let t = 1.7;
        let a = cmatrix(2, 2, &[(0.5, 0.0), (0.0, 0.0), (0.0, 0.0), (-2.0, 0.0)]);
        let e = matrix_exponential(&a, c(0.0, -t)).unwrap();
        let expected = cmatrix(
            2,
            2,
            &[((-0.5 * t).cos(), (-0.5 * t).sin()), (0.0, 0.0), (0.0, 0.0), ((2.0 * t).cos(), (2.0 * t).sin())],
        );
        assert!((e - expected).norm() < 1e-13);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let t = 2.5;
        let a = cmatrix(2, 2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let expected = cmatrix(2, 2, &[(1.0, 0.0), (0.0, -t), (0.0, 0.0), (1.0, 0.0)]);
        let oracle = taylor_exp(&a, c(0.0, -t), 30);
        assert!((&oracle - &expected).norm() < 1e-14);
        let e = matrix_exponential(&a, c(0.0, -t)).unwrap();
        assert!((e - expected).norm() < 1e-12);
    }

    #[test]
    fn large_norm_uses_squaring() {
        let a = cmatrix(2, 2, &[(0.0, 0.0), (30.0, 0.0), (-30.0, 0.0), (0.0, 0.0)]);
        // rotation by 30 radians
        let e = matrix_exponential(&a, c(1.0, 0.0)).unwrap();
        let expected = cmatrix(2, 2, &[(30f64.cos(), 0.0), (30f64.sin(), 0.0), (-30f64.sin(), 0.0), (30f64.cos(), 0.0)]);
        assert!((e - expected).norm() < 1e-11);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            matrix_exponential(&CMatrix::zeros(2, 3), c(1.0, 0.0)),
            Err(Error::NotSquare { .. })
        ));
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(matrix_exponential(&a, c(1.0, 0.0)), Err(Error::InvalidInput(_))));
    }
}
