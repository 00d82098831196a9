//! Numerical tolerances shared across modules.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerances steering every structural decision (clustering, numerical rank,
/// validation). All values are relative to `max(1, ‖H‖)` unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Eigenvalues closer than this are one cluster.
    pub cluster_tol: f64,
    /// Radius within which nearby clusters are tested for coalescence into a
    /// single defective eigenvalue.
    pub coalesce_tol: f64,
    /// Singular-value threshold for numerical rank.
    pub rank_tol: f64,
    /// Validation tolerance for the (P, T) algebra and PT-symmetry.
    pub val_tol: f64,
    /// Accepted residual of the canonical decomposition.
    pub can_tol: f64,
    /// Accepted intertwining residual of a metric operator.
    pub met_tol: f64,
    /// Lower bound on `cos α` in the Bender formulas.
    pub crit_tol: f64,
    /// Weight tolerance for free-state decompositions.
    pub p_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-8,
            coalesce_tol: 1e-4,
            rank_tol: 1e-10,
            val_tol: 1e-10,
            can_tol: 1e-8,
            met_tol: 1e-8,
            crit_tol: 1e-6,
            p_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("cluster_tol", self.cluster_tol),
            ("coalesce_tol", self.coalesce_tol),
            ("rank_tol", self.rank_tol),
            ("val_tol", self.val_tol),
            ("can_tol", self.can_tol),
            ("met_tol", self.met_tol),
            ("crit_tol", self.crit_tol),
            ("p_tol", self.p_tol),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive() {
        let t = Tolerances { rank_tol: 0.0, ..Default::default() };
        assert!(t.validate().is_err());
    }
}
