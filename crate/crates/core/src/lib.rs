//! Finite-dimensional PT-symmetric quantum mechanics.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex primitives (exponential, norms, square roots,
//!   Jordan chains).
//! - [`pt`]: parity / time-reversal pairs and the PT-symmetry test.
//! - [`canonical`]: the structured Jordan form `Ψ⁻¹HΨ = J`, `PT·conj(Ψ) = ΨK`
//!   and the unbroken / broken classification.
//! - [`metric`]: metric operators `η = Ψ⁻†SΨ⁻¹`, η-inner products and
//!   coefficient matrices in the canonical basis.
//! - [`dynamics`]: evolution under `e^{-itH}` and conserved-quantity tracking.
//! - [`superposition`]: free states and free Kraus operators for a
//!   non-orthogonal basis.
//! - [`bender`]: the two-level Bender family and Stokes parameters.
//! - [`dilation`]: unitary dilation of scaled unbroken evolution.
//!
//! All operations are pure functions over immutable values.

pub mod bender;
pub mod canonical;
pub mod config;
pub mod dilation;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod metric;
pub mod pt;
pub mod sample;
pub mod superposition;

pub use error::{Error, ErrorKind, Result, Violation};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
