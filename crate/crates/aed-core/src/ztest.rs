//! One-sided pooled-variance z-test for superiority on a binary endpoint.
//!
//! This is the elementary p-value generator for every population and stage:
//! the signed one-sided form of the chi-squared test for two proportions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm::{phi, Probability, ZScore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("responders ({responders}) exceed total ({total})")]
    ResponderOverflow { responders: u32, total: u32 },
    #[error("arm total must be at least 1")]
    EmptyArm,
}

/// Responder count out of a positive number of subjects in one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCounts", into = "RawCounts")]
pub struct ArmCounts {
    responders: u32,
    total: u32,
}

#[derive(Serialize, Deserialize)]
struct RawCounts {
    responders: u32,
    total: u32,
}

impl ArmCounts {
    pub fn new(responders: u32, total: u32) -> Result<Self, CountError> {
        if total == 0 {
            return Err(CountError::EmptyArm);
        }
        if responders > total {
            return Err(CountError::ResponderOverflow { responders, total });
        }
        Ok(ArmCounts { responders, total })
    }

    pub fn responders(self) -> u32 {
        self.responders
    }

    pub fn total(self) -> u32 {
        self.total
    }

    pub fn proportion(self) -> f64 {
        f64::from(self.responders) / f64::from(self.total)
    }
}

impl TryFrom<RawCounts> for ArmCounts {
    type Error = CountError;

    fn try_from(raw: RawCounts) -> Result<Self, Self::Error> {
        ArmCounts::new(raw.responders, raw.total)
    }
}

impl From<ArmCounts> for RawCounts {
    fn from(c: ArmCounts) -> RawCounts {
        RawCounts { responders: c.responders, total: c.total }
    }
}

/// Pooled-variance z statistic for the difference of two proportions,
/// positive when the experimental proportion exceeds control.
///
/// Degenerate data with zero pooled variance (all responders or none)
/// yields z = 0 by convention.
pub fn pooled_z(experimental: ArmCounts, control: ArmCounts) -> ZScore {
    ZScore::new_unchecked(pooled_z_from_rates(
        experimental.proportion(),
        f64::from(experimental.total()),
        control.proportion(),
        f64::from(control.total()),
    ))
}

/// One-sided superiority p-value, p = 1 − Φ(z). Equals 0.5 exactly when
/// the pooled variance vanishes.
pub fn one_sided_p(experimental: ArmCounts, control: ArmCounts) -> Probability {
    Probability::new_unchecked(1.0 - phi(pooled_z(experimental, control).value()))
}

/// Rate-scale pooled z for possibly non-integer "observed" proportions.
///
/// Used by the minimal-detectable-difference solver, where the observed
/// difference is a continuous unknown and expected counts need not be whole.
pub(crate) fn pooled_z_from_rates(rate_exp: f64, n_exp: f64, rate_ctrl: f64, n_ctrl: f64) -> f64 {
    debug_assert!(n_exp >= 1.0 && n_ctrl >= 1.0);
    let pooled = (rate_exp * n_exp + rate_ctrl * n_ctrl) / (n_exp + n_ctrl);
    let variance = pooled * (1.0 - pooled) * (1.0 / n_exp + 1.0 / n_ctrl);
    if variance <= 0.0 {
        return 0.0;
    }
    (rate_exp - rate_ctrl) / variance.sqrt()
}

/// One-sided p-value on the rate scale, sharing the zero-variance convention.
pub(crate) fn one_sided_p_from_rates(rate_exp: f64, n_exp: f64, rate_ctrl: f64, n_ctrl: f64) -> f64 {
    1.0 - phi(pooled_z_from_rates(rate_exp, n_exp, rate_ctrl, n_ctrl))
}
