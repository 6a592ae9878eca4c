//! Closed testing with Simes intersection and inverse-normal combination
//! across stages, plus the interim population-selection and futility rule.
//!
//! Two elementary one-sided hypotheses are under test: no benefit in the
//! full population F and no benefit in the biomarker-positive subgroup S.
//! Closed testing rejects an elementary hypothesis only when the Simes test
//! of the intersection is also significant, which controls the familywise
//! error in the strong sense. Across stages, p-values are combined with
//! pre-specified inverse-normal weights, so the stage-2 test remains valid
//! no matter which population the interim analysis selects.

use serde::{Deserialize, Serialize};

use crate::boundaries::BoundaryPair;
use crate::design::DesignSpec;
use crate::norm::{inverse_phi, phi, Probability};
use crate::ztest::{one_sided_p, ArmCounts};

/// P-values of exactly 0 or 1 are pulled this far into the open interval
/// before the normal quantile is taken.
pub const P_CLAMP: f64 = 1e-15;

/// Running tally of responders for one arm within one subgroup. Unlike
/// [`ArmCounts`] a tally may be empty (a population that enrolled nobody).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub responders: u32,
    pub subjects: u32,
}

impl Tally {
    pub fn new(responders: u32, subjects: u32) -> Self {
        assert!(responders <= subjects, "responders exceed subjects");
        Tally { responders, subjects }
    }

    pub fn record(&mut self, responded: bool) {
        self.subjects += 1;
        if responded {
            self.responders += 1;
        }
    }

    /// Observed proportion; an empty tally counts as 0.
    pub fn proportion_or_zero(self) -> f64 {
        if self.subjects == 0 {
            0.0
        } else {
            f64::from(self.responders) / f64::from(self.subjects)
        }
    }

    fn arm_counts(self) -> Option<ArmCounts> {
        ArmCounts::new(self.responders, self.subjects).ok()
    }

    fn plus(self, other: Tally) -> Tally {
        Tally {
            responders: self.responders + other.responders,
            subjects: self.subjects + other.subjects,
        }
    }
}

/// Both arms of one subgroup.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupData {
    pub experimental: Tally,
    pub control: Tally,
}

impl SubgroupData {
    pub fn new(experimental: Tally, control: Tally) -> Self {
        SubgroupData { experimental, control }
    }

    /// Observed risk difference, experimental minus control; empty cells
    /// contribute a proportion of 0.
    pub fn risk_difference(&self) -> f64 {
        self.experimental.proportion_or_zero() - self.control.proportion_or_zero()
    }

    /// One-sided superiority p-value; any empty cell falls back to the
    /// zero-variance convention p = 0.5.
    pub fn p_value(&self) -> Probability {
        match (self.experimental.arm_counts(), self.control.arm_counts()) {
            (Some(e), Some(c)) => one_sided_p(e, c),
            _ => Probability::HALF,
        }
    }

    pub fn has_empty_cell(&self) -> bool {
        self.experimental.subjects == 0 || self.control.subjects == 0
    }
}

/// Per-stage observed counts, split by biomarker status. Full-population
/// counts are always derived by summation, never stored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageData {
    /// Biomarker-positive subgroup S.
    pub positive: SubgroupData,
    /// Biomarker-negative complement C.
    pub negative: SubgroupData,
}

impl StageData {
    pub fn new(positive: SubgroupData, negative: SubgroupData) -> Self {
        StageData { positive, negative }
    }

    /// Pooled full-population counts, F = S + C.
    pub fn full(&self) -> SubgroupData {
        SubgroupData {
            experimental: self.positive.experimental.plus(self.negative.experimental),
            control: self.positive.control.plus(self.negative.control),
        }
    }

    pub fn enrolled(&self) -> u32 {
        let f = self.full();
        f.experimental.subjects + f.control.subjects
    }

    pub fn has_empty_cell(&self) -> bool {
        self.positive.has_empty_cell() || self.negative.has_empty_cell()
    }
}

/// Elementary and Simes-intersection p-values for one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagePValues {
    /// p for the subgroup hypothesis, from S data alone.
    pub subgroup: Probability,
    /// p for the full-population hypothesis, from pooled S + C data.
    pub full: Probability,
    /// Simes p for the intersection of the two hypotheses.
    pub intersection: Probability,
}

/// Computes the stage-wise p-values: the subgroup test on S, the
/// full-population test on pooled data, and their Simes intersection.
pub fn stage_p_values(data: &StageData) -> StagePValues {
    let p_s = data.positive.p_value();
    let p_f = data.full().p_value();
    StagePValues { subgroup: p_s, full: p_f, intersection: simes_p(p_s, p_f) }
}

/// The five-way (seven-category) interim outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterimDecision {
    /// Stop: the full-population hypothesis alone is rejected at stage 1.
    EfficacyFull,
    /// Stop: the subgroup hypothesis alone is rejected at stage 1.
    EfficacySubgroup,
    /// Stop: both hypotheses are rejected at stage 1.
    EfficacyBoth,
    /// Stop for futility: neither observed effect clears its threshold.
    Futility,
    /// Continue enrolling only biomarker-positive subjects; only the
    /// subgroup hypothesis is tested at the final analysis.
    ContinueSubgroup,
    /// Continue in the full population; only the full-population
    /// hypothesis is tested at the final analysis.
    ContinueFull,
    /// Continue in the full population with both hypotheses retained.
    ContinueBoth,
}

impl InterimDecision {
    pub const ALL: [InterimDecision; 7] = [
        InterimDecision::EfficacyFull,
        InterimDecision::EfficacySubgroup,
        InterimDecision::EfficacyBoth,
        InterimDecision::Futility,
        InterimDecision::ContinueSubgroup,
        InterimDecision::ContinueFull,
        InterimDecision::ContinueBoth,
    ];

    /// Position within [`InterimDecision::ALL`].
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|d| *d == self).expect("member of ALL")
    }

    /// Report label for the decision category.
    pub fn label(self) -> &'static str {
        match self {
            InterimDecision::EfficacyFull => "1a - Stop after stage 1: efficacy in F only",
            InterimDecision::EfficacySubgroup => "1b - Stop after stage 1: efficacy in S only",
            InterimDecision::EfficacyBoth => "1c - Stop after stage 1: efficacy in F and S",
            InterimDecision::Futility => "2 - Stop after stage 1: futility",
            InterimDecision::ContinueSubgroup => "3 - Continue to stage 2: S only",
            InterimDecision::ContinueFull => "4 - Continue to stage 2: F only",
            InterimDecision::ContinueBoth => "5 - Continue to stage 2: F and S",
        }
    }

    /// True for the four stage-1 stop categories.
    pub fn is_terminal(self) -> bool {
        !matches!(
            self,
            InterimDecision::ContinueSubgroup
                | InterimDecision::ContinueFull
                | InterimDecision::ContinueBoth
        )
    }

    pub fn tests_subgroup_at_stage2(self) -> bool {
        matches!(self, InterimDecision::ContinueSubgroup | InterimDecision::ContinueBoth)
    }

    pub fn tests_full_at_stage2(self) -> bool {
        matches!(self, InterimDecision::ContinueFull | InterimDecision::ContinueBoth)
    }

    /// Stage-2 enrollment is restricted to biomarker-positive subjects.
    pub fn enriches(self) -> bool {
        self == InterimDecision::ContinueSubgroup
    }
}

/// The analysis stage at which a hypothesis was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    One,
    Two,
}

/// Final rejection status of the two elementary hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FinalRejections {
    pub reject_full: bool,
    pub reject_subgroup: bool,
    pub stage_full: Option<Stage>,
    pub stage_subgroup: Option<Stage>,
}

impl FinalRejections {
    pub fn none() -> Self {
        FinalRejections::default()
    }

    /// Rejections implied by a terminal stage-1 decision.
    pub fn from_interim(decision: InterimDecision) -> Self {
        let (f, s) = match decision {
            InterimDecision::EfficacyFull => (true, false),
            InterimDecision::EfficacySubgroup => (false, true),
            InterimDecision::EfficacyBoth => (true, true),
            _ => (false, false),
        };
        FinalRejections {
            reject_full: f,
            reject_subgroup: s,
            stage_full: f.then_some(Stage::One),
            stage_subgroup: s.then_some(Stage::One),
        }
    }

    pub fn any(&self) -> bool {
        self.reject_full || self.reject_subgroup
    }

    pub fn both(&self) -> bool {
        self.reject_full && self.reject_subgroup
    }
}

/// Two-hypothesis Simes intersection p-value:
/// min(2·min(pₐ, p_b), max(pₐ, p_b)).
pub fn simes_p(p_a: Probability, p_b: Probability) -> Probability {
    let (a, b) = (p_a.value(), p_b.value());
    let lo = a.min(b);
    let hi = a.max(b);
    Probability::new_unchecked((2.0 * lo).min(hi))
}

/// Inverse-normal combination of stage-wise p-values:
/// 1 − Φ(w₁·Φ⁻¹(1 − p₁) + w₂·Φ⁻¹(1 − p₂)).
///
/// P-values of exactly 0 or 1 are clamped to [`P_CLAMP`] inside the open
/// interval before the quantile is taken.
pub fn combine(p_stage1: Probability, p_stage2: Probability, w1: f64, w2: f64) -> Probability {
    debug_assert!(w1 >= 0.0 && w2 >= 0.0 && (w1 * w1 + w2 * w2 - 1.0).abs() < 1e-9);
    let p1 = p_stage1.value().clamp(P_CLAMP, 1.0 - P_CLAMP);
    let p2 = p_stage2.value().clamp(P_CLAMP, 1.0 - P_CLAMP);
    let z = w1 * inverse_phi(1.0 - p1) + w2 * inverse_phi(1.0 - p2);
    Probability::new_unchecked(1.0 - phi(z))
}

/// Applies the interim rule to stage-1 data: closed-testing rejection at
/// the stage-1 level, then the threshold-based selection of the stage-2
/// population(s), else futility.
pub fn interim_decide(
    stage1: &StageData,
    design: &DesignSpec,
    boundaries: &BoundaryPair,
) -> InterimDecision {
    let p = stage_p_values(stage1);
    let delta_s = stage1.positive.risk_difference();
    let delta_c = stage1.negative.risk_difference();
    interim_decide_from(&p, delta_s, delta_c, design, boundaries)
}

/// The interim rule on already-computed quantities: stage-1 p-values plus
/// the observed risk differences in the subgroup and its complement.
pub fn interim_decide_from(
    p: &StagePValues,
    delta_s: f64,
    delta_c: f64,
    design: &DesignSpec,
    boundaries: &BoundaryPair,
) -> InterimDecision {
    let alpha1 = boundaries.alpha1.value();
    if p.intersection.value() <= alpha1 {
        let reject_f = p.full.value() <= alpha1;
        let reject_s = p.subgroup.value() <= alpha1;
        match (reject_f, reject_s) {
            (true, true) => return InterimDecision::EfficacyBoth,
            (true, false) => return InterimDecision::EfficacyFull,
            (false, true) => return InterimDecision::EfficacySubgroup,
            (false, false) => {}
        }
    }
    // selection thresholds: continuation of F is predicated on the observed
    // effect in the biomarker-negative complement
    let keep_s = delta_s >= design.d_s();
    let keep_f = delta_c >= design.d_c();
    match (keep_s, keep_f) {
        (true, true) => InterimDecision::ContinueBoth,
        (true, false) => InterimDecision::ContinueSubgroup,
        (false, true) => InterimDecision::ContinueFull,
        (false, false) => InterimDecision::Futility,
    }
}

/// Applies the stage-2 combination tests given the stage-1 p-values, the
/// stage-2 data, and the interim decision.
///
/// Stage-2 elementary p-values come from stage-2 data only. When one
/// population was dropped at the interim, the stage-2 intersection p-value
/// is the remaining population's elementary p-value; when both continue it
/// is their Simes combination. A hypothesis is rejected iff its combined
/// intersection p-value and its combined elementary p-value both fall at or
/// below the stage-2 local level.
///
/// Terminal interim decisions short-circuit to the stage-1 rejections.
pub fn final_decide(
    stage1_p: &StagePValues,
    stage2: &StageData,
    continuation: InterimDecision,
    design: &DesignSpec,
    boundaries: &BoundaryPair,
) -> FinalRejections {
    if continuation.is_terminal() {
        return FinalRejections::from_interim(continuation);
    }
    let p2 = match continuation {
        InterimDecision::ContinueSubgroup => {
            let p_s = stage2.positive.p_value();
            StagePValues { subgroup: p_s, full: Probability::HALF, intersection: p_s }
        }
        InterimDecision::ContinueFull => {
            let p_f = stage2.full().p_value();
            StagePValues { subgroup: Probability::HALF, full: p_f, intersection: p_f }
        }
        InterimDecision::ContinueBoth => stage_p_values(stage2),
        _ => unreachable!("terminal decisions handled above"),
    };
    final_decide_from(stage1_p, &p2, continuation, design, boundaries)
}

/// The stage-2 rejection rule on already-computed stage-wise p-values.
///
/// `stage2_p.intersection` must already reflect the continued populations
/// (the single remaining elementary p-value if one was dropped).
pub fn final_decide_from(
    stage1_p: &StagePValues,
    stage2_p: &StagePValues,
    continuation: InterimDecision,
    design: &DesignSpec,
    boundaries: &BoundaryPair,
) -> FinalRejections {
    if continuation.is_terminal() {
        return FinalRejections::from_interim(continuation);
    }
    let (w1, w2) = design.weights();
    let alpha2 = boundaries.alpha2.value();
    let combined_int = combine(stage1_p.intersection, stage2_p.intersection, w1, w2);
    let int_ok = combined_int.value() <= alpha2;

    let mut out = FinalRejections::none();
    if continuation.tests_full_at_stage2() {
        let combined_f = combine(stage1_p.full, stage2_p.full, w1, w2);
        if int_ok && combined_f.value() <= alpha2 {
            out.reject_full = true;
            out.stage_full = Some(Stage::Two);
        }
    }
    if continuation.tests_subgroup_at_stage2() {
        let combined_s = combine(stage1_p.subgroup, stage2_p.subgroup, w1, w2);
        if int_ok && combined_s.value() <= alpha2 {
            out.reject_subgroup = true;
            out.stage_subgroup = Some(Stage::Two);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundaries::solve_boundaries;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    fn case_study() -> (DesignSpec, BoundaryPair) {
        let design = DesignSpec::default();
        let b = solve_boundaries(design.alpha_total(), design.alpha1(), design.information_fraction())
            .unwrap();
        (design, b)
    }

    fn subgroup(xe: u32, ne: u32, xc: u32, nc: u32) -> SubgroupData {
        SubgroupData::new(Tally::new(xe, ne), Tally::new(xc, nc))
    }

    #[test]
    fn simes_examples() {
        assert_eq!(simes_p(p(0.5), p(0.5)).value(), 0.5);
        assert!((simes_p(p(0.01), p(0.04)).value() - 0.02).abs() < 1e-15);
        assert!((simes_p(p(0.03), p(0.011)).value() - 0.022).abs() < 1e-15);
        assert_eq!(simes_p(p(0.2), p(0.7)), simes_p(p(0.7), p(0.2)));
    }

    #[test]
    fn combine_fixed_points() {
        // both stages null: combined stays at one half
        let (w1, w2) = DesignSpec::default().weights();
        assert!((combine(p(0.5), p(0.5), w1, w2).value() - 0.5).abs() < 1e-14);
        // degenerate weight passes stage 1 through
        for v in [0.01, 0.3, 0.78] {
            assert!((combine(p(v), p(v), 1.0, 0.0).value() - v).abs() < 1e-11);
        }
    }

    #[test]
    fn combine_case_study_value() {
        // frozen from the 50-digit oracle:
        // Ztilde = (w1 + w2) * 2.241403 = 3.142118, tail mass 8.3865e-4
        let (w1, w2) = DesignSpec::default().weights();
        let c = combine(p(0.0125), p(0.0125), w1, w2);
        assert!((c.value() - 8.386517885931098e-4).abs() < 1e-10);
    }

    #[test]
    fn combine_clamps_degenerate_pvalues() {
        let (w1, w2) = DesignSpec::default().weights();
        let at_zero = combine(Probability::ZERO, p(0.4), w1, w2);
        let at_clamp = combine(p(P_CLAMP), p(0.4), w1, w2);
        assert_eq!(at_zero, at_clamp);
        let at_one = combine(Probability::ONE, p(0.4), w1, w2);
        assert!(at_one.value() > 0.9 && at_one.value() < 1.0);
    }

    #[test]
    fn stage_pvalues_pool_for_full_population() {
        let data = StageData::new(subgroup(30, 48, 20, 48), subgroup(25, 55, 24, 54));
        let pv = stage_p_values(&data);
        let full = data.full();
        assert_eq!(full.experimental.subjects, 103);
        assert_eq!(full.control.subjects, 102);
        assert_eq!(pv.full, full.p_value());
        assert_eq!(pv.intersection, simes_p(pv.subgroup, pv.full));
    }

    #[test]
    fn null_data_is_futile() {
        let (design, b) = case_study();
        let data = StageData::new(subgroup(50, 100, 50, 100), subgroup(50, 100, 50, 100));
        assert_eq!(interim_decide(&data, &design, &b), InterimDecision::Futility);
    }

    #[test]
    fn threshold_logic_selects_subgroup_only() {
        // effects below the stage-1 efficacy bar, subgroup clears d_s = 0.12,
        // complement misses d_c = 0.10
        let (design, b) = case_study();
        let positive = subgroup(28, 48, 22, 48); // delta_s = 0.125
        let negative = subgroup(25, 55, 22, 54); // delta_c = 0.047
        let data = StageData::new(positive, negative);
        let pv = stage_p_values(&data);
        assert!(pv.intersection.value() > design.alpha1().value());
        assert_eq!(interim_decide(&data, &design, &b), InterimDecision::ContinueSubgroup);
    }

    #[test]
    fn threshold_logic_other_cells() {
        let (design, b) = case_study();
        // only complement clears its threshold
        let data = StageData::new(subgroup(25, 48, 22, 48), subgroup(30, 55, 22, 54));
        assert_eq!(interim_decide(&data, &design, &b), InterimDecision::ContinueFull);
        // both clear
        let data = StageData::new(subgroup(28, 48, 22, 48), subgroup(30, 55, 22, 54));
        assert_eq!(interim_decide(&data, &design, &b), InterimDecision::ContinueBoth);
    }

    #[test]
    fn large_full_population_effect_stops_for_efficacy() {
        // observed F risk difference of ~0.19 at the case-study sizes, past
        // the stage-1 detectable difference of 0.17
        let (design, b) = case_study();
        let data = StageData::new(subgroup(31, 48, 22, 48), subgroup(35, 55, 24, 54));
        let full = data.full();
        assert!(full.risk_difference() >= 0.17, "got {}", full.risk_difference());
        let decision = interim_decide(&data, &design, &b);
        assert!(
            decision == InterimDecision::EfficacyFull || decision == InterimDecision::EfficacyBoth,
            "got {decision:?}"
        );
    }

    #[test]
    fn efficacy_precedes_threshold_check() {
        // overwhelming effect everywhere: must stop for efficacy, not continue
        let (design, b) = case_study();
        let data = StageData::new(subgroup(45, 48, 10, 48), subgroup(50, 55, 11, 54));
        let decision = interim_decide(&data, &design, &b);
        assert_eq!(decision, InterimDecision::EfficacyBoth);
    }

    #[test]
    fn final_null_subgroup_does_not_reject() {
        let (design, b) = case_study();
        let p1 = StagePValues { subgroup: p(0.5), full: p(0.5), intersection: p(0.5) };
        let stage2 = StageData::new(subgroup(30, 60, 30, 60), SubgroupData::default());
        let out = final_decide(&p1, &stage2, InterimDecision::ContinueSubgroup, &design, &b);
        assert!(!out.any());
    }

    #[test]
    fn final_tiny_pvalues_reject_subgroup() {
        let (design, b) = case_study();
        let p1 = StagePValues { subgroup: p(1e-6), full: p(0.5), intersection: p(2e-6) };
        let p2 = StagePValues { subgroup: p(1e-6), full: Probability::HALF, intersection: p(1e-6) };
        let out =
            final_decide_from(&p1, &p2, InterimDecision::ContinueSubgroup, &design, &b);
        assert!(out.reject_subgroup && !out.reject_full);
        assert_eq!(out.stage_subgroup, Some(Stage::Two));
    }

    #[test]
    fn final_case_study_mdd_consistency_for_full() {
        // near-identical observed proportions in both stages, F difference
        // ~0.15 (just past its conservative detectable boundary of 0.14
        // under "both continue"), S difference >= 0.17: F must be rejected.
        let (design, b) = case_study();
        let stage1 = StageData::new(
            subgroup(30, 48, 22, 48), // delta_s ~ 0.167
            subgroup(33, 55, 25, 54), // delta_c ~ 0.137; delta_f ~ 0.151
        );
        let f1 = stage1.full();
        assert!(f1.risk_difference() > 0.14 && f1.risk_difference() < 0.156);
        let p1 = stage_p_values(&stage1);
        let interim = interim_decide(&stage1, &design, &b);
        assert_eq!(interim, InterimDecision::ContinueBoth);
        // stage 2 at matching proportions: 60/60 in F, 28/28 within S,
        // delta_s2 ~ 0.179, delta_f2 = 0.15
        let stage2 = StageData::new(subgroup(18, 28, 13, 28), subgroup(19, 32, 15, 32));
        assert!(stage2.positive.risk_difference() >= 0.17);
        let out = final_decide(&p1, &stage2, interim, &design, &b);
        assert!(out.reject_full, "combined F p-values: {:?}", out);
    }

    #[test]
    fn dropped_population_cannot_be_rejected() {
        let (design, b) = case_study();
        let p1 = StagePValues { subgroup: p(1e-9), full: p(1e-9), intersection: p(1e-9) };
        let p2 = StagePValues { subgroup: p(1e-9), full: p(1e-9), intersection: p(1e-9) };
        let only_s = final_decide_from(&p1, &p2, InterimDecision::ContinueSubgroup, &design, &b);
        assert!(only_s.reject_subgroup && !only_s.reject_full);
        let only_f = final_decide_from(&p1, &p2, InterimDecision::ContinueFull, &design, &b);
        assert!(only_f.reject_full && !only_f.reject_subgroup);
    }

    #[test]
    fn terminal_decisions_pass_through() {
        let (design, b) = case_study();
        let p1 = StagePValues { subgroup: p(0.001), full: p(0.001), intersection: p(0.001) };
        let stage2 = StageData::default();
        let out = final_decide(&p1, &stage2, InterimDecision::EfficacyBoth, &design, &b);
        assert!(out.both());
        assert_eq!(out.stage_full, Some(Stage::One));
        let out = final_decide(&p1, &stage2, InterimDecision::Futility, &design, &b);
        assert!(!out.any());
    }

    #[test]
    fn stage2_symmetry_between_populations() {
        // with equal stage-1 and equal stage-2 elementary p-values, the two
        // hypotheses are rejected or retained together
        let (design, b) = case_study();
        for v1 in [0.02, 0.05, 0.2] {
            for v2 in [0.005, 0.04, 0.3] {
                let p1 = StagePValues { subgroup: p(v1), full: p(v1), intersection: p(v1) };
                let p2 = StagePValues { subgroup: p(v2), full: p(v2), intersection: p(v2) };
                let out = final_decide_from(&p1, &p2, InterimDecision::ContinueBoth, &design, &b);
                assert_eq!(out.reject_full, out.reject_subgroup, "v1={v1}, v2={v2}");
            }
        }
    }

    #[test]
    fn decision_labels_and_indices_are_stable() {
        for (i, d) in InterimDecision::ALL.iter().enumerate() {
            assert_eq!(d.index(), i);
        }
        assert!(InterimDecision::EfficacyFull.label().starts_with("1a"));
        assert!(InterimDecision::ContinueBoth.label().starts_with("5"));
        assert!(InterimDecision::Futility.is_terminal());
        assert!(!InterimDecision::ContinueSubgroup.is_terminal());
        assert!(InterimDecision::ContinueSubgroup.enriches());
        assert!(!InterimDecision::ContinueBoth.enriches());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::boundaries::solve_boundaries;
    use proptest::prelude::*;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    proptest! {
        #[test]
        fn simes_bounds(a in 0.0_f64..=1.0, b in 0.0_f64..=1.0) {
            let s = simes_p(p(a), p(b)).value();
            let lo = a.min(b);
            prop_assert!(s >= lo - 1e-15);
            prop_assert!(s <= (2.0 * lo).min(1.0) + 1e-15);
            prop_assert!(s <= a.max(b) + 1e-15);
        }

        #[test]
        fn simes_symmetric(a in 0.0_f64..=1.0, b in 0.0_f64..=1.0) {
            prop_assert_eq!(simes_p(p(a), p(b)), simes_p(p(b), p(a)));
        }

        #[test]
        fn combine_monotone_in_each_argument(
            p1 in 0.001_f64..0.999,
            p2 in 0.001_f64..0.999,
            bump in 0.0005_f64..0.3,
        ) {
            let (w1, w2) = DesignSpec::default().weights();
            let base = combine(p(p1), p(p2), w1, w2).value();
            let b1 = combine(p((p1 + bump).min(1.0)), p(p2), w1, w2).value();
            let b2 = combine(p(p1), p((p2 + bump).min(1.0)), w1, w2).value();
            prop_assert!(b1 >= base - 1e-12);
            prop_assert!(b2 >= base - 1e-12);
        }

        #[test]
        fn closed_testing_monotone_in_subgroup_pvalue(
            p_f in 0.001_f64..0.999,
            p_s_hi in 0.001_f64..0.999,
            shrink in 0.01_f64..1.0,
        ) {
            // lowering the subgroup p-value (other population unchanged)
            // never un-rejects the subgroup hypothesis
            let design = DesignSpec::default();
            let b = solve_boundaries(
                design.alpha_total(), design.alpha1(), design.information_fraction(),
            ).unwrap();
            let p_s_lo = p_s_hi * shrink;
            let reject = |p_s: f64| {
                let pv = StagePValues {
                    subgroup: p(p_s),
                    full: p(p_f),
                    intersection: simes_p(p(p_s), p(p_f)),
                };
                let a1 = b.alpha1.value();
                pv.intersection.value() <= a1 && pv.subgroup.value() <= a1
            };
            prop_assert!(!reject(p_s_hi) || reject(p_s_lo));
        }
    }
}
