// Shared by several test targets; not every target uses every oracle.
#![allow(dead_code)]

//! Independent test oracles.
//!
//! Nothing here shares code with the library's numerical paths: the normal
//! CDF is a power series, its inverse is bisection on that series, the
//! orthant probability is adaptive Simpson quadrature, and trial operating
//! characteristics come from exhaustive enumeration of all outcome
//! configurations. These exist to catch errors in the production
//! implementations, so they favor transparency over speed.

use aed_core::adaptive::InterimDecision;
use aed_core::{
    final_decide, interim_decide, solve_boundaries, BoundaryPair, DesignSpec, Probability,
    ScenarioSpec, StageData, SubgroupData, Tally,
};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// erf via the confluent hypergeometric series
/// erf(x) = 2x·e^(−x²)/√π · Σ (2x²)ⁿ / (1·3·5···(2n+1)),
/// whose terms are all positive (no cancellation). Good to ~1e-15 relative
/// for |x| ≤ 12.
pub fn erf_series(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_series(-x);
    }
    if x > 12.0 {
        return 1.0;
    }
    let x2 = 2.0 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut denom = 1.0;
    for _ in 0..1000 {
        denom += 2.0;
        term *= x2 / denom;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    let two_over_sqrt_pi = 1.1283791670955126;
    two_over_sqrt_pi * x * (-x * x).exp() * sum
}

/// Φ(x) from the series erf.
pub fn phi_oracle(x: f64) -> f64 {
    if x < -12.0 {
        return 0.0;
    }
    if x > 12.0 {
        return 1.0;
    }
    0.5 * (1.0 + erf_series(x / SQRT_2))
}

fn phi_density(x: f64) -> f64 {
    0.3989422804014327 * (-0.5 * x * x).exp()
}

/// Φ⁻¹ by bisection on the series CDF.
pub fn inverse_phi_oracle(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let mut lo = -13.0;
    let mut hi = 13.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_oracle(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// P(X > a, Y > b) by conditioning on X and integrating the conditional
/// upper tail with adaptive Simpson quadrature.
pub fn orthant_oracle(a: f64, b: f64, rho: f64) -> f64 {
    assert!(rho.abs() < 1.0);
    let s = (1.0 - rho * rho).sqrt();
    let f = |x: f64| phi_density(x) * (1.0 - phi_oracle((b - rho * x) / s));
    let lo = a.max(-12.0);
    let hi = 12.0;
    if lo >= hi {
        return 0.0;
    }
    adaptive_simpson(&f, lo, hi, 1e-12, 60)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Two-hypothesis Simes re-derived from the general sorted form
/// min over i of (m/i)·p₍ᵢ₎.
pub fn simes_oracle(p_a: f64, p_b: f64) -> f64 {
    let mut sorted = [p_a, p_b];
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, p)| p * m / (i as f64 + 1.0))
        .fold(f64::INFINITY, f64::min)
}

/// Inverse-normal combination re-derived through the series oracle.
pub fn combine_oracle(p1: f64, p2: f64, w1: f64, w2: f64) -> f64 {
    let clamp = |p: f64| p.clamp(1e-15, 1.0 - 1e-15);
    let z = w1 * inverse_phi_oracle(1.0 - clamp(p1)) + w2 * inverse_phi_oracle(1.0 - clamp(p2));
    1.0 - phi_oracle(z)
}

// ---------------------------------------------------------------------
// Exhaustive enumeration of miniature trials
// ---------------------------------------------------------------------

/// Exact operating characteristics of a miniature design, obtained by
/// enumerating every possible dataset with its probability.
pub struct ExactCharacteristics {
    pub decision_prob: [f64; 7],
    pub power_full: f64,
    pub power_subgroup: f64,
    pub power_either: f64,
    pub power_both: f64,
    /// P(continue with F only ∧ reject F), and analogues.
    pub joint_full_only: f64,
    pub joint_subgroup_only: f64,
    pub joint_both: f64,
}

struct ArmLayout {
    positives: u32,
    negatives: u32,
    p_pos: f64,
    p_neg: f64,
}

/// Every (responders-in-positive, responders-in-negative) outcome of one
/// arm with its probability, for planned subgroup counts.
fn arm_outcomes(layout: &ArmLayout) -> Vec<(Tally, Tally, f64)> {
    let mut out = Vec::new();
    for xp in 0..=layout.positives {
        let wp = binom_pmf(layout.positives, xp, layout.p_pos);
        for xn in 0..=layout.negatives {
            let wn = binom_pmf(layout.negatives, xn, layout.p_neg);
            out.push((
                Tally::new(xp, layout.positives),
                Tally::new(xn, layout.negatives),
                wp * wn,
            ));
        }
    }
    out
}

fn binom_pmf(n: u32, k: u32, p: f64) -> f64 {
    let mut coef = 1.0;
    for i in 0..k {
        coef *= f64::from(n - i) / f64::from(i + 1);
    }
    coef * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// All stage datasets with probabilities for a mixed-population stage of
/// `n` subjects under planned subgroup counts.
fn stage_outcomes(
    design: &DesignSpec,
    n: u32,
    enriched: bool,
    p_pos_exp: f64,
    p_neg_exp: f64,
    p_ctrl: f64,
) -> Vec<(StageData, f64)> {
    let (n_exp, n_ctrl) = design.split_arms(n);
    let split = |n_arm: u32| {
        if enriched {
            (n_arm, 0)
        } else {
            let k = design.subgroup_size(n_arm);
            (k, n_arm - k)
        }
    };
    let (kpe, kne) = split(n_exp);
    let (kpc, knc) = split(n_ctrl);
    let exp_arm = arm_outcomes(&ArmLayout {
        positives: kpe,
        negatives: kne,
        p_pos: p_pos_exp,
        p_neg: p_neg_exp,
    });
    let ctrl_arm = arm_outcomes(&ArmLayout {
        positives: kpc,
        negatives: knc,
        p_pos: p_ctrl,
        p_neg: p_ctrl,
    });
    let mut out = Vec::with_capacity(exp_arm.len() * ctrl_arm.len());
    for (pe, ne, we) in &exp_arm {
        for (pc, nc, wc) in &ctrl_arm {
            out.push((
                StageData::new(SubgroupData::new(*pe, *pc), SubgroupData::new(*ne, *nc)),
                we * wc,
            ));
        }
    }
    out
}

/// All stage datasets for a mixed stage under per-subject Bernoulli
/// biomarker status: the positive count per arm is itself binomial.
fn stage_outcomes_stochastic(
    design: &DesignSpec,
    n: u32,
    p_pos_exp: f64,
    p_neg_exp: f64,
    p_ctrl: f64,
) -> Vec<(StageData, f64)> {
    let prevalence = design.prevalence().value();
    let (n_exp, n_ctrl) = design.split_arms(n);
    let arm = |n_arm: u32, p_pos: f64, p_neg: f64| {
        let mut out = Vec::new();
        for k in 0..=n_arm {
            let wk = binom_pmf(n_arm, k, prevalence);
            for (pos, neg, w) in arm_outcomes(&ArmLayout {
                positives: k,
                negatives: n_arm - k,
                p_pos,
                p_neg,
            }) {
                out.push((pos, neg, wk * w));
            }
        }
        out
    };
    let exp_arm = arm(n_exp, p_pos_exp, p_neg_exp);
    let ctrl_arm = arm(n_ctrl, p_ctrl, p_ctrl);
    let mut out = Vec::with_capacity(exp_arm.len() * ctrl_arm.len());
    for (pe, ne, we) in &exp_arm {
        for (pc, nc, wc) in &ctrl_arm {
            out.push((
                StageData::new(SubgroupData::new(*pe, *pc), SubgroupData::new(*ne, *nc)),
                we * wc,
            ));
        }
    }
    out
}

/// Exact enumeration of the complete two-stage design in the design's own
/// sampling mode. Every stage-1 dataset is expanded; continuing branches
/// expand every stage-2 dataset of the selected cohort.
pub fn enumerate_exact(design: &DesignSpec, scenario: &ScenarioSpec) -> ExactCharacteristics {
    let boundaries =
        solve_boundaries(design.alpha_total(), design.alpha1(), design.information_fraction())
            .expect("boundaries solve");
    let thin = 1.0 - design.dropout().value();
    let pi2 = scenario.pi2().value();
    let p_pos_exp = thin * (pi2 + scenario.effect_s());
    let p_neg_exp = thin * (pi2 + scenario.effect_c());
    let p_ctrl = thin * pi2;

    let mixed = |n: u32| match design.biomarker_sampling() {
        aed_core::design::BiomarkerSampling::PlannedCounts => {
            stage_outcomes(design, n, false, p_pos_exp, p_neg_exp, p_ctrl)
        }
        aed_core::design::BiomarkerSampling::Stochastic => {
            stage_outcomes_stochastic(design, n, p_pos_exp, p_neg_exp, p_ctrl)
        }
    };
    let stage2_mixed = mixed(design.n2());
    let stage2_enriched = stage_outcomes(design, design.n2(), true, p_pos_exp, p_neg_exp, p_ctrl);

    let mut out = ExactCharacteristics {
        decision_prob: [0.0; 7],
        power_full: 0.0,
        power_subgroup: 0.0,
        power_either: 0.0,
        power_both: 0.0,
        joint_full_only: 0.0,
        joint_subgroup_only: 0.0,
        joint_both: 0.0,
    };

    for (stage1, w1) in mixed(design.n1()) {
        let interim = interim_decide(&stage1, design, &boundaries);
        out.decision_prob[interim.index()] += w1;
        if interim.is_terminal() {
            let r = aed_core::FinalRejections::from_interim(interim);
            record(&mut out, interim, &r, w1);
            continue;
        }
        let p1 = aed_core::stage_p_values(&stage1);
        let stage2_set =
            if interim.enriches() { &stage2_enriched } else { &stage2_mixed };
        for (stage2, w2) in stage2_set {
            let r = final_decide(&p1, stage2, interim, design, &boundaries);
            record(&mut out, interim, &r, w1 * w2);
        }
    }
    out
}

fn record(
    out: &mut ExactCharacteristics,
    interim: InterimDecision,
    r: &aed_core::FinalRejections,
    w: f64,
) {
    if r.reject_full {
        out.power_full += w;
    }
    if r.reject_subgroup {
        out.power_subgroup += w;
    }
    if r.any() {
        out.power_either += w;
    }
    if r.both() {
        out.power_both += w;
    }
    match interim {
        InterimDecision::ContinueFull if r.reject_full => out.joint_full_only += w,
        InterimDecision::ContinueSubgroup if r.reject_subgroup => out.joint_subgroup_only += w,
        InterimDecision::ContinueBoth if r.any() => out.joint_both += w,
        _ => {}
    }
}

/// Boundaries for the case-study design, shared by several test files.
pub fn case_study_boundaries(design: &DesignSpec) -> BoundaryPair {
    solve_boundaries(design.alpha_total(), design.alpha1(), design.information_fraction())
        .expect("case-study boundaries solve")
}

pub fn prob(v: f64) -> Probability {
    Probability::new(v).expect("test probability in range")
}
