//! Two-look group-sequential local significance levels.
//!
//! The stage-1 statistic Z₁ and the combined statistic Z̃₂ follow the same
//! bivariate normal law as a standard group-sequential design with
//! information fractions t₁ and 1, with correlation √t₁. Given the total
//! one-sided level and the stage-1 spend, the stage-2 level solves
//!
//! P(Z₁ > z₁) + P(Z₁ ≤ z₁, Z̃₂ > z₂) = α.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm::{bvn_upper, inverse_phi, phi, Probability, ZScore};
use crate::solve::{brent, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundaryError {
    #[error("need 0 < alpha1 < alpha_total < 1, got alpha1={alpha1}, alpha_total={alpha_total}")]
    LevelOrder { alpha1: f64, alpha_total: f64 },
    #[error("information fraction must lie in (0, 1), got {0}")]
    InformationFraction(f64),
    #[error("no stage-2 level in (0, 0.5] satisfies the spend: {0}")]
    InfeasibleSpend(SolveError),
}

/// Solved local significance levels for the two analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPair {
    pub alpha_total: Probability,
    pub alpha1: Probability,
    pub alpha2: Probability,
    pub z1: ZScore,
    pub z2: ZScore,
    /// Information fraction of the stage-1 look.
    pub t1: f64,
}

const Z_MAX: f64 = 38.0;
const Z_TOL: f64 = 1e-12;

/// Solves the stage-2 local level given the total level, the stage-1 local
/// level, and the information fraction t₁ (the squared stage-1 weight).
pub fn solve_boundaries(
    alpha_total: Probability,
    alpha1: Probability,
    t1: f64,
) -> Result<BoundaryPair, BoundaryError> {
    let at = alpha_total.value();
    let a1 = alpha1.value();
    if !(a1 > 0.0 && a1 < at && at < 1.0) {
        return Err(BoundaryError::LevelOrder { alpha1: a1, alpha_total: at });
    }
    if !(t1 > 0.0 && t1 < 1.0) {
        return Err(BoundaryError::InformationFraction(t1));
    }
    let rho = t1.sqrt();
    let z1 = inverse_phi(1.0 - a1);
    // spend(z2) − α, strictly decreasing in z2
    let residual = |z2: f64| a1 + (1.0 - phi(z2)) - bvn_upper(z1, z2, rho) - at;
    let z2 = brent(residual, 0.0, Z_MAX, Z_TOL).map_err(BoundaryError::InfeasibleSpend)?;
    Ok(BoundaryPair {
        alpha_total,
        alpha1,
        alpha2: Probability::new_unchecked(1.0 - phi(z2)),
        z1: ZScore::new_unchecked(z1),
        z2: ZScore::new_unchecked(z2),
        t1,
    })
}

/// Convenience wrapper: spends `fraction` of the total level at stage 1.
pub fn solve_boundaries_with_spend(
    alpha_total: Probability,
    fraction: f64,
    t1: f64,
) -> Result<BoundaryPair, BoundaryError> {
    let a1 = fraction * alpha_total.value();
    let alpha1 = Probability::new(a1)
        .map_err(|_| BoundaryError::LevelOrder { alpha1: a1, alpha_total: alpha_total.value() })?;
    solve_boundaries(alpha_total, alpha1, t1)
}

impl BoundaryPair {
    /// Total probability spent by these boundaries under the bivariate law;
    /// equals `alpha_total` up to solver tolerance.
    pub fn spent(&self) -> f64 {
        self.alpha1.value() + (1.0 - phi(self.z2.value()))
            - bvn_upper(self.z1.value(), self.z2.value(), self.t1.sqrt())
    }
}
