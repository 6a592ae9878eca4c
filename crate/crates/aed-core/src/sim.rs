//! Monte Carlo simulation of complete adaptive enrichment trials.
//!
//! Each replication draws per-subject biomarker status and response, applies
//! the interim rule, enrolls stage 2 in the selected population(s), and
//! applies the final combination tests. Replications use counter-based
//! random streams derived from `(seed, replication index)`, so results are
//! bit-identical no matter how the work is scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adaptive::{
    final_decide, interim_decide_from, stage_p_values, FinalRejections, InterimDecision, StageData,
};
use crate::boundaries::{solve_boundaries, BoundaryError, BoundaryPair};
use crate::design::{BiomarkerSampling, DesignSpec};
use crate::norm::Probability;
use crate::ztest::{one_sided_p, ArmCounts};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("scenario rate out of range: {0}")]
    ScenarioRange(String),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

/// True response probabilities for one simulated world: a control rate
/// shared by both subgroups and additive treatment effects in the
/// biomarker-positive subgroup and its complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pi2: Probability,
    effect_s: f64,
    effect_c: f64,
}

impl ScenarioSpec {
    pub fn new(pi2: Probability, effect_s: f64, effect_c: f64) -> Result<Self, SimError> {
        for (name, effect) in [("effect_s", effect_s), ("effect_c", effect_c)] {
            let rate = pi2.value() + effect;
            if !rate.is_finite() || !(0.0..=1.0).contains(&rate) {
                return Err(SimError::ScenarioRange(format!(
                    "{name} = {effect} puts the experimental rate at {rate}"
                )));
            }
        }
        Ok(ScenarioSpec { pi2, effect_s, effect_c })
    }

    pub fn pi2(&self) -> Probability {
        self.pi2
    }

    pub fn effect_s(&self) -> f64 {
        self.effect_s
    }

    pub fn effect_c(&self) -> f64 {
        self.effect_c
    }

    /// Implied treatment effect in the full population at a given
    /// biomarker prevalence.
    pub fn effect_full(&self, prevalence: Probability) -> f64 {
        let w = prevalence.value();
        w * self.effect_s + (1.0 - w) * self.effect_c
    }
}

/// One simulated trial: the interim decision and the final rejection state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub interim: InterimDecision,
    pub rejections: FinalRejections,
}

/// The deterministic random stream for one replication.
///
/// The seed keys the generator and the replication index selects the
/// stream, so any replication can be regenerated independently of
/// execution order.
pub fn replication_stream(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Simulates one complete trial.
///
/// Each stage splits its enrollment exactly between the arms (odd remainder
/// to the experimental arm) and draws per-subject responses
/// Bernoulli((1 − dropout)·π) with π chosen by arm and subgroup — dropouts
/// count as non-responders. Biomarker status follows the design's sampling
/// mode: planned per-arm positive counts round(n·prevalence), or a
/// Bernoulli(prevalence) draw per subject. If the interim decision
/// continues, stage 2 enrolls `n2` subjects: all biomarker-positive under
/// enrichment, otherwise from the mixed population.
pub fn simulate_trial(
    design: &DesignSpec,
    scenario: &ScenarioSpec,
    boundaries: &BoundaryPair,
    rng: &mut impl Rng,
) -> TrialOutcome {
    let thin = 1.0 - design.dropout().value();
    let pi2 = scenario.pi2().value();
    // response probabilities indexed by [experimental][biomarker-positive]
    let response = [
        [thin * pi2, thin * pi2],
        [thin * (pi2 + scenario.effect_c()), thin * (pi2 + scenario.effect_s())],
    ];

    let stage1 = enroll(design.n1(), Cohort::Mixed, response, design, rng);
    let p1 = stage_p_values(&stage1);
    let interim = interim_decide_from(
        &p1,
        stage1.positive.risk_difference(),
        stage1.negative.risk_difference(),
        design,
        boundaries,
    );
    if interim.is_terminal() {
        return TrialOutcome { interim, rejections: FinalRejections::from_interim(interim) };
    }

    let cohort = if interim.enriches() { Cohort::AllPositive } else { Cohort::Mixed };
    let stage2 = enroll(design.n2(), cohort, response, design, rng);
    let rejections = final_decide(&p1, &stage2, interim, design, boundaries);
    TrialOutcome { interim, rejections }
}

#[derive(Clone, Copy, PartialEq)]
enum Cohort {
    Mixed,
    AllPositive,
}

fn enroll(
    n: u32,
    cohort: Cohort,
    response: [[f64; 2]; 2],
    design: &DesignSpec,
    rng: &mut impl Rng,
) -> StageData {
    let (n_exp, n_ctrl) = design.split_arms(n);
    let mut data = StageData::default();
    for (experimental, n_arm) in [(true, n_exp), (false, n_ctrl)] {
        let per_subject = cohort == Cohort::Mixed
            && design.biomarker_sampling() == BiomarkerSampling::Stochastic;
        let positives = match cohort {
            Cohort::AllPositive => n_arm,
            Cohort::Mixed => design.subgroup_size(n_arm),
        };
        for i in 0..n_arm {
            let positive = if per_subject {
                rng.random_bool(design.prevalence().value())
            } else {
                i < positives
            };
            let p = response[usize::from(experimental)][usize::from(positive)];
            let responded = rng.random_bool(p);
            let subgroup = if positive { &mut data.positive } else { &mut data.negative };
            let cell =
                if experimental { &mut subgroup.experimental } else { &mut subgroup.control };
            cell.record(responded);
        }
    }
    data
}

/// Frequencies of the seven interim decision categories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionFrequencies {
    pub efficacy_full_only: f64,
    pub efficacy_subgroup_only: f64,
    pub efficacy_both: f64,
    pub futility: f64,
    pub continue_subgroup: f64,
    pub continue_full: f64,
    pub continue_both: f64,
}

impl DecisionFrequencies {
    pub fn get(&self, decision: InterimDecision) -> f64 {
        match decision {
            InterimDecision::EfficacyFull => self.efficacy_full_only,
            InterimDecision::EfficacySubgroup => self.efficacy_subgroup_only,
            InterimDecision::EfficacyBoth => self.efficacy_both,
            InterimDecision::Futility => self.futility,
            InterimDecision::ContinueSubgroup => self.continue_subgroup,
            InterimDecision::ContinueFull => self.continue_full,
            InterimDecision::ContinueBoth => self.continue_both,
        }
    }

    pub fn sum(&self) -> f64 {
        InterimDecision::ALL.iter().map(|d| self.get(*d)).sum()
    }
}

/// A conditional power estimate with the size of its conditioning set.
/// `estimate` is `None` when fewer than [`MIN_CONDITIONAL_DENOMINATOR`]
/// replications reached the conditioning event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPower {
    pub estimate: Option<f64>,
    pub events: u64,
    pub denominator: u64,
}

pub const MIN_CONDITIONAL_DENOMINATOR: u64 = 100;

impl ConditionalPower {
    fn from_counts(events: u64, denominator: u64) -> Self {
        let estimate = (denominator >= MIN_CONDITIONAL_DENOMINATOR)
            .then(|| events as f64 / denominator as f64);
        ConditionalPower { estimate, events, denominator }
    }

    /// Monte Carlo standard error of the conditional estimate.
    pub fn mc_se(&self) -> Option<f64> {
        self.estimate.map(|f| mc_standard_error(f, self.denominator))
    }
}

/// Aggregated operating characteristics over all replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingCharacteristics {
    pub n_reps: u64,
    pub decision_freq: DecisionFrequencies,
    /// P(reject the full-population hypothesis at either analysis).
    pub power_full: f64,
    /// P(reject the subgroup hypothesis at either analysis).
    pub power_subgroup: f64,
    /// P(reject at least one hypothesis).
    pub power_either: f64,
    /// P(reject both hypotheses).
    pub power_both: f64,
    /// P(reject F at the final analysis | continued with F only).
    pub cond_power_full_only: ConditionalPower,
    /// P(reject S at the final analysis | continued with S only).
    pub cond_power_subgroup_only: ConditionalPower,
    /// P(reject F or S at the final analysis | continued with both).
    pub cond_power_both: ConditionalPower,
    /// Raw decision counts backing `decision_freq`.
    pub decision_counts: [u64; 7],
}

impl OperatingCharacteristics {
    /// Monte Carlo standard error for an unconditional frequency estimate.
    pub fn mc_se(&self, frequency: f64) -> f64 {
        mc_standard_error(frequency, self.n_reps)
    }
}

/// sqrt(f (1 − f) / n), the binomial standard error of a frequency.
pub fn mc_standard_error(frequency: f64, n: u64) -> f64 {
    (frequency * (1.0 - frequency) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    decisions: [u64; 7],
    reject_full: u64,
    reject_subgroup: u64,
    reject_either: u64,
    reject_both: u64,
    full_only_events: u64,
    subgroup_only_events: u64,
    both_events: u64,
}

impl Accumulator {
    fn record(mut self, outcome: &TrialOutcome) -> Self {
        self.decisions[outcome.interim.index()] += 1;
        let r = &outcome.rejections;
        self.reject_full += u64::from(r.reject_full);
        self.reject_subgroup += u64::from(r.reject_subgroup);
        self.reject_either += u64::from(r.any());
        self.reject_both += u64::from(r.both());
        match outcome.interim {
            InterimDecision::ContinueFull => self.full_only_events += u64::from(r.reject_full),
            InterimDecision::ContinueSubgroup => {
                self.subgroup_only_events += u64::from(r.reject_subgroup)
            }
            InterimDecision::ContinueBoth => self.both_events += u64::from(r.any()),
            _ => {}
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.decisions.iter_mut().zip(other.decisions) {
            *a += b;
        }
        self.reject_full += other.reject_full;
        self.reject_subgroup += other.reject_subgroup;
        self.reject_either += other.reject_either;
        self.reject_both += other.reject_both;
        self.full_only_events += other.full_only_events;
        self.subgroup_only_events += other.subgroup_only_events;
        self.both_events += other.both_events;
        self
    }

    fn finish(self, n_reps: u64) -> OperatingCharacteristics {
        let n = n_reps as f64;
        let freq = |i: usize| self.decisions[i] as f64 / n;
        OperatingCharacteristics {
            n_reps,
            decision_freq: DecisionFrequencies {
                efficacy_full_only: freq(0),
                efficacy_subgroup_only: freq(1),
                efficacy_both: freq(2),
                futility: freq(3),
                continue_subgroup: freq(4),
                continue_full: freq(5),
                continue_both: freq(6),
            },
            power_full: self.reject_full as f64 / n,
            power_subgroup: self.reject_subgroup as f64 / n,
            power_either: self.reject_either as f64 / n,
            power_both: self.reject_both as f64 / n,
            cond_power_full_only: ConditionalPower::from_counts(
                self.full_only_events,
                self.decisions[InterimDecision::ContinueFull.index()],
            ),
            cond_power_subgroup_only: ConditionalPower::from_counts(
                self.subgroup_only_events,
                self.decisions[InterimDecision::ContinueSubgroup.index()],
            ),
            cond_power_both: ConditionalPower::from_counts(
                self.both_events,
                self.decisions[InterimDecision::ContinueBoth.index()],
            ),
            decision_counts: self.decisions,
        }
    }
}

/// Runs `n_reps` independent replications and aggregates their outcomes.
///
/// Per-replication streams derive from `(seed, index)`, and the reduction
/// sums integer counts, so the result is bit-identical for any thread count
/// or scheduling order.
pub fn run_simulation(
    design: &DesignSpec,
    scenario: &ScenarioSpec,
    n_reps: u64,
    seed: u64,
) -> Result<OperatingCharacteristics, SimError> {
    let boundaries =
        solve_boundaries(design.alpha_total(), design.alpha1(), design.information_fraction())?;
    let acc = (0..n_reps)
        .into_par_iter()
        .fold(Accumulator::default, |acc, rep| {
            let mut rng = replication_stream(seed, rep);
            acc.record(&simulate_trial(design, scenario, &boundaries, &mut rng))
        })
        .reduce(Accumulator::default, Accumulator::merge);
    Ok(acc.finish(n_reps))
}

/// Rejection frequency of the original single-stage all-comers design: a
/// pooled one-sided test at level `alpha` on `n_total` subjects split 1:1.
pub fn fixed_design_power(
    n_total: u32,
    pi2: Probability,
    effect: f64,
    dropout: Probability,
    alpha: Probability,
    n_reps: u64,
    seed: u64,
) -> Result<f64, SimError> {
    let rate = pi2.value() + effect;
    if !(0.0..=1.0).contains(&rate) {
        return Err(SimError::ScenarioRange(format!(
            "effect {effect} puts the experimental rate at {rate}"
        )));
    }
    let thin = 1.0 - dropout.value();
    let n_exp = n_total.div_ceil(2);
    let n_ctrl = n_total - n_exp;
    let rejections: u64 = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_stream(seed, rep);
            let mut x_exp = 0u32;
            for _ in 0..n_exp {
                x_exp += u32::from(rng.random_bool(thin * rate));
            }
            let mut x_ctrl = 0u32;
            for _ in 0..n_ctrl {
                x_ctrl += u32::from(rng.random_bool(thin * pi2.value()));
            }
            let p = one_sided_p(
                ArmCounts::new(x_exp, n_exp).expect("counts bounded by totals"),
                ArmCounts::new(x_ctrl, n_ctrl).expect("counts bounded by totals"),
            );
            u64::from(p.value() <= alpha.value())
        })
        .sum();
    Ok(rejections as f64 / n_reps as f64)
}
