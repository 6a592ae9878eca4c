//! Pre-specified trial parameters for the two-stage adaptive enrichment
//! design.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norm::Probability;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct DesignError {
    pub field: &'static str,
    pub message: String,
}

fn err(field: &'static str, message: impl Into<String>) -> DesignError {
    DesignError { field, message: message.into() }
}

/// How simulated enrollment realizes the biomarker-positive fraction.
///
/// `PlannedCounts` fixes the number of positives per arm at
/// round(n·prevalence); `Stochastic` draws each subject's status
/// Bernoulli(prevalence), so subgroup sizes vary between trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiomarkerSampling {
    PlannedCounts,
    Stochastic,
}

/// All pre-specified parameters of the design: stage sizes, combination
/// weights, alpha spending, biomarker prevalence, dropout, and the interim
/// futility/selection thresholds.
///
/// Construct via [`DesignSpec::builder`]. The default (an empty builder)
/// encodes the IMpassion031 case study: n₁ = 205, n₂ = 120, one-sided
/// α = 0.025 with 50% spent at stage 1, prevalence 47%, dropout 5%, and
/// thresholds d_S = 12%, d_C = 10%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    n1: u32,
    n2: u32,
    alloc_ratio: f64,
    alpha_total: Probability,
    alpha1: Probability,
    w1: f64,
    w2: f64,
    prevalence: Probability,
    dropout: Probability,
    d_s: f64,
    d_c: f64,
    biomarker_sampling: BiomarkerSampling,
}

impl Default for DesignSpec {
    fn default() -> Self {
        DesignBuilder::default().build().expect("case-study defaults are valid")
    }
}

impl DesignSpec {
    pub fn builder() -> DesignBuilder {
        DesignBuilder::default()
    }

    /// Stage-1 enrollment (full population).
    pub fn n1(&self) -> u32 {
        self.n1
    }

    /// Stage-2 enrollment (full population or subgroup, per the interim
    /// selection).
    pub fn n2(&self) -> u32 {
        self.n2
    }

    pub fn alloc_ratio(&self) -> f64 {
        self.alloc_ratio
    }

    pub fn alpha_total(&self) -> Probability {
        self.alpha_total
    }

    /// Stage-1 local significance level.
    pub fn alpha1(&self) -> Probability {
        self.alpha1
    }

    /// Inverse-normal combination weights (w₁, w₂) with w₁² + w₂² = 1.
    pub fn weights(&self) -> (f64, f64) {
        (self.w1, self.w2)
    }

    /// Information fraction t₁ = w₁² of the stage-1 analysis.
    pub fn information_fraction(&self) -> f64 {
        self.w1 * self.w1
    }

    /// Biomarker-positive prevalence in the full population.
    pub fn prevalence(&self) -> Probability {
        self.prevalence
    }

    pub fn dropout(&self) -> Probability {
        self.dropout
    }

    /// Interim continuation threshold on the observed risk difference in
    /// the biomarker-positive subgroup.
    pub fn d_s(&self) -> f64 {
        self.d_s
    }

    /// Interim continuation threshold on the observed risk difference in
    /// the biomarker-negative complement.
    pub fn d_c(&self) -> f64 {
        self.d_c
    }

    /// Splits `n` subjects between the arms at the allocation ratio,
    /// rounding the experimental arm up on ties (odd remainders go to the
    /// experimental arm under 1:1 allocation).
    pub fn split_arms(&self, n: u32) -> (u32, u32) {
        let frac = self.alloc_ratio / (1.0 + self.alloc_ratio);
        let n_exp = (f64::from(n) * frac).round() as u32;
        (n_exp, n - n_exp)
    }

    /// Planned biomarker-positive subgroup size out of `n` subjects
    /// (round half to even), as used in detectable-difference planning.
    pub fn subgroup_size(&self, n: u32) -> u32 {
        (f64::from(n) * self.prevalence.value()).round_ties_even() as u32
    }

    /// How simulated enrollment realizes the biomarker prevalence.
    pub fn biomarker_sampling(&self) -> BiomarkerSampling {
        self.biomarker_sampling
    }
}

/// Builder for [`DesignSpec`]; every field defaults to the case-study value.
#[derive(Debug, Clone)]
pub struct DesignBuilder {
    n1: u32,
    n2: u32,
    alloc_ratio: f64,
    alpha_total: f64,
    // exactly one of the two may be set; spend wins over the default alpha1
    alpha1: Option<f64>,
    stage1_spend: f64,
    weights: Option<(f64, f64)>,
    prevalence: f64,
    dropout: f64,
    d_s: f64,
    d_c: f64,
    biomarker_sampling: BiomarkerSampling,
}

impl Default for DesignBuilder {
    fn default() -> Self {
        DesignBuilder {
            n1: 205,
            n2: 120,
            alloc_ratio: 1.0,
            alpha_total: 0.025,
            alpha1: None,
            stage1_spend: 0.5,
            weights: None,
            prevalence: 0.47,
            dropout: 0.05,
            d_s: 0.12,
            d_c: 0.10,
            biomarker_sampling: BiomarkerSampling::PlannedCounts,
        }
    }
}

impl DesignBuilder {
    pub fn stage_sizes(mut self, n1: u32, n2: u32) -> Self {
        self.n1 = n1;
        self.n2 = n2;
        self
    }

    pub fn alloc_ratio(mut self, ratio: f64) -> Self {
        self.alloc_ratio = ratio;
        self
    }

    pub fn alpha_total(mut self, alpha: f64) -> Self {
        self.alpha_total = alpha;
        self
    }

    /// Sets the stage-1 local level directly (overrides the spend fraction).
    pub fn alpha1(mut self, alpha1: f64) -> Self {
        self.alpha1 = Some(alpha1);
        self
    }

    /// Fraction of the overall level spent at stage 1: α₁ = fraction · α.
    pub fn stage1_spend(mut self, fraction: f64) -> Self {
        self.stage1_spend = fraction;
        self.alpha1 = None;
        self
    }

    /// Overrides the default sample-size weights w₁² = n₁/(n₁+n₂).
    pub fn weights(mut self, w1: f64, w2: f64) -> Self {
        self.weights = Some((w1, w2));
        self
    }

    pub fn prevalence(mut self, prevalence: f64) -> Self {
        self.prevalence = prevalence;
        self
    }

    pub fn dropout(mut self, dropout: f64) -> Self {
        self.dropout = dropout;
        self
    }

    pub fn thresholds(mut self, d_s: f64, d_c: f64) -> Self {
        self.d_s = d_s;
        self.d_c = d_c;
        self
    }

    pub fn biomarker_sampling(mut self, sampling: BiomarkerSampling) -> Self {
        self.biomarker_sampling = sampling;
        self
    }

    pub fn build(self) -> Result<DesignSpec, DesignError> {
        if self.n1 < 2 {
            return Err(err("n1", format!("stage-1 size must be at least 2, got {}", self.n1)));
        }
        if self.n2 < 2 {
            return Err(err("n2", format!("stage-2 size must be at least 2, got {}", self.n2)));
        }
        if !self.alloc_ratio.is_finite() || self.alloc_ratio <= 0.0 {
            return Err(err("alloc_ratio", format!("must be positive, got {}", self.alloc_ratio)));
        }
        if !(self.alpha_total > 0.0 && self.alpha_total < 1.0) {
            return Err(err("alpha_total", format!("must lie in (0, 1), got {}", self.alpha_total)));
        }
        let alpha1 = match self.alpha1 {
            Some(a1) => a1,
            None => {
                if !(self.stage1_spend > 0.0 && self.stage1_spend < 1.0) {
                    return Err(err(
                        "stage1_spend",
                        format!("must lie in (0, 1), got {}", self.stage1_spend),
                    ));
                }
                self.stage1_spend * self.alpha_total
            }
        };
        if !(alpha1 > 0.0 && alpha1 < self.alpha_total) {
            return Err(err(
                "alpha1",
                format!("must satisfy 0 < alpha1 < alpha_total, got {alpha1}"),
            ));
        }
        let (w1, w2) = match self.weights {
            Some((w1, w2)) => {
                if w1 < 0.0 || w2 < 0.0 || (w1 * w1 + w2 * w2 - 1.0).abs() > 1e-12 {
                    return Err(err(
                        "weights",
                        format!("need nonnegative w1, w2 with w1^2 + w2^2 = 1, got ({w1}, {w2})"),
                    ));
                }
                (w1, w2)
            }
            None => {
                let total = f64::from(self.n1 + self.n2);
                ((f64::from(self.n1) / total).sqrt(), (f64::from(self.n2) / total).sqrt())
            }
        };
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(err("prevalence", format!("must lie in (0, 1), got {}", self.prevalence)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(err("dropout", format!("must lie in [0, 1), got {}", self.dropout)));
        }
        for (field, d) in [("d_s", self.d_s), ("d_c", self.d_c)] {
            if !d.is_finite() || d.abs() >= 1.0 {
                return Err(err(field, format!("must lie in (-1, 1), got {d}")));
            }
        }
        Ok(DesignSpec {
            n1: self.n1,
            n2: self.n2,
            alloc_ratio: self.alloc_ratio,
            alpha_total: Probability::new(self.alpha_total).expect("validated"),
            alpha1: Probability::new(alpha1).expect("validated"),
            w1,
            w2,
            prevalence: Probability::new(self.prevalence).expect("validated"),
            dropout: Probability::new(self.dropout).expect("validated"),
            d_s: self.d_s,
            d_c: self.d_c,
            biomarker_sampling: self.biomarker_sampling,
        })
    }
}
