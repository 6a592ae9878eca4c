//! Minimal detectable differences: the smallest observed absolute risk
//! difference that yields a significant result for a population at a given
//! analysis.
//!
//! MDDs translate local significance levels onto the clinically
//! interpretable treatment-effect scale. They require consistency
//! assumptions: the control-arm rate is fixed at a hypothesized nuisance
//! value, and for stage-2 computations the observed proportions are assumed
//! identical across stages. The conservative variant assumes the population
//! in question alone drives the Simes intersection test (adjusted p-value
//! 2p); the liberal variant is valid only when the other population drives
//! it (raw p-value).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adaptive::{combine, Stage};
use crate::boundaries::BoundaryPair;
use crate::design::DesignSpec;
use crate::norm::Probability;
use crate::solve::{brent, SolveError};
use crate::ztest::one_sided_p_from_rates;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MddError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no observed difference up to {max_delta:.4} reaches level {level:.6}")]
    Infeasible { level: f64, max_delta: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Population whose null hypothesis the MDD refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Population {
    Subgroup,
    Full,
}

impl Population {
    pub fn label(self) -> &'static str {
        match self {
            Population::Subgroup => "S",
            Population::Full => "F",
        }
    }
}

/// Stage-2 continuation configuration the MDD is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Continuation {
    SubgroupOnly,
    FullOnly,
    Both,
    NotApplicable,
}

impl Continuation {
    pub fn label(self) -> &'static str {
        match self {
            Continuation::SubgroupOnly => "only S tested in stage 2",
            Continuation::FullOnly => "only F tested in stage 2",
            Continuation::Both => "F and S included in stage 2",
            Continuation::NotApplicable => "-",
        }
    }
}

/// One MDD computation: which population, at which analysis, under which
/// continuation, with the conservative or liberal intersection assumption,
/// at a given nuisance control rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MddRequest {
    pub population: Population,
    pub stage: Stage,
    pub continuation: Continuation,
    pub conservative: bool,
    pub control_rate: Probability,
    pub design: DesignSpec,
    pub boundaries: BoundaryPair,
}

/// A solved MDD together with the consistency assumptions it rests on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddResult {
    pub delta: f64,
    pub assumptions: String,
}

const DELTA_TOL: f64 = 1e-12;

/// MDD for a single-stage trial with `n_per_arm` subjects per arm: the
/// observed difference over the control rate whose one-sided p-value equals
/// `level` exactly. Proportions are treated as continuous.
pub fn mdd_single_stage(
    n_per_arm: u32,
    control_rate: Probability,
    level: Probability,
) -> Result<f64, MddError> {
    if n_per_arm < 2 {
        return Err(MddError::InvalidRequest(format!(
            "need at least 2 subjects per arm, got {n_per_arm}"
        )));
    }
    check_rate_and_level(control_rate, level)?;
    let n = f64::from(n_per_arm);
    solve_delta(level.value(), control_rate.value(), |delta, ctrl| {
        one_sided_p_from_rates(ctrl + delta, n, ctrl, n)
    })
}

/// Stage-1 MDD. The conservative variant solves for an adjusted p-value
/// 2p = α₁; the liberal variant solves for p = α₁ directly. The subgroup
/// uses the planned biomarker-positive share of the stage-1 enrollment.
pub fn mdd_stage1(request: &MddRequest) -> Result<MddResult, MddError> {
    validate(request)?;
    if request.stage != Stage::One {
        return Err(MddError::InvalidRequest("stage-2 request passed to mdd_stage1".into()));
    }
    let design = &request.design;
    let alpha1 = request.boundaries.alpha1.value();
    let level = if request.conservative { alpha1 / 2.0 } else { alpha1 };
    check_rate_and_level(request.control_rate, Probability::new_unchecked(level))?;
    let (n_exp, n_ctrl) = stage1_arms(design, request.population);
    let delta = solve_delta(level, request.control_rate.value(), |delta, ctrl| {
        one_sided_p_from_rates(ctrl + delta, n_exp, ctrl, n_ctrl)
    })?;
    Ok(MddResult { delta, assumptions: stage1_assumptions(request) })
}

/// Stage-2 MDD via the inverse-normal combination test, assuming identical
/// observed proportions across stages. Single-population continuations use
/// the adjusted stage-1 p-value and the raw stage-2 p-value; under
/// continuation with both populations the conservative variant adjusts both
/// stages and the liberal variant adjusts neither.
pub fn mdd_stage2(request: &MddRequest) -> Result<MddResult, MddError> {
    validate(request)?;
    if request.stage != Stage::Two {
        return Err(MddError::InvalidRequest("stage-1 request passed to mdd_stage2".into()));
    }
    let design = &request.design;
    let boundaries = &request.boundaries;
    let alpha2 = boundaries.alpha2.value();
    check_rate_and_level(request.control_rate, Probability::new_unchecked(alpha2))?;

    let (n1_exp, n1_ctrl) = stage1_arms(design, request.population);
    let (n2_exp, n2_ctrl) = stage2_arms(design, request.population, request.continuation);
    let (adjust1, adjust2) = match request.continuation {
        Continuation::SubgroupOnly | Continuation::FullOnly => (true, false),
        Continuation::Both => (request.conservative, request.conservative),
        Continuation::NotApplicable => unreachable!("rejected by validate"),
    };
    let (w1, w2) = design.weights();

    let delta = solve_delta(alpha2, request.control_rate.value(), |delta, ctrl| {
        let p1 = adjust(one_sided_p_from_rates(ctrl + delta, n1_exp, ctrl, n1_ctrl), adjust1);
        let p2 = adjust(one_sided_p_from_rates(ctrl + delta, n2_exp, ctrl, n2_ctrl), adjust2);
        combine(p1, p2, w1, w2).value()
    })?;
    Ok(MddResult { delta, assumptions: stage2_assumptions(request) })
}

/// The full planning grid at one nuisance control rate: stage-1
/// conservative and liberal MDDs for S and F, and the stage-2 MDDs for all
/// three continuation configurations (conservative and liberal where both
/// populations continue).
pub fn mdd_table(
    design: &DesignSpec,
    boundaries: &BoundaryPair,
    control_rate: Probability,
) -> Result<Vec<MddEntry>, MddError> {
    let mut entries = Vec::with_capacity(10);
    let base = |population, stage, continuation, conservative| MddRequest {
        population,
        stage,
        continuation,
        conservative,
        control_rate,
        design: *design,
        boundaries: *boundaries,
    };
    for population in [Population::Subgroup, Population::Full] {
        for conservative in [true, false] {
            let request = base(population, Stage::One, Continuation::NotApplicable, conservative);
            entries.push(MddEntry::new(&request, mdd_stage1(&request)?));
        }
    }
    let request = base(Population::Subgroup, Stage::Two, Continuation::SubgroupOnly, true);
    entries.push(MddEntry::new(&request, mdd_stage2(&request)?));
    let request = base(Population::Full, Stage::Two, Continuation::FullOnly, true);
    entries.push(MddEntry::new(&request, mdd_stage2(&request)?));
    for population in [Population::Subgroup, Population::Full] {
        for conservative in [true, false] {
            let request = base(population, Stage::Two, Continuation::Both, conservative);
            entries.push(MddEntry::new(&request, mdd_stage2(&request)?));
        }
    }
    Ok(entries)
}

/// One row of the MDD planning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddEntry {
    pub stage: Stage,
    pub population: Population,
    pub continuation: Continuation,
    pub conservative: bool,
    pub control_rate: f64,
    pub delta: f64,
    pub assumptions: String,
}

impl MddEntry {
    fn new(request: &MddRequest, result: MddResult) -> Self {
        MddEntry {
            stage: request.stage,
            population: request.population,
            continuation: request.continuation,
            conservative: request.conservative,
            control_rate: request.control_rate.value(),
            delta: result.delta,
            assumptions: result.assumptions,
        }
    }
}

/// Diagnostic check that the futility thresholds sit below every stage-2
/// MDD. A threshold above an MDD would be incoherent: the same observed
/// effect could trigger a futility stop at the interim yet reject at the
/// final analysis.
pub fn futility_coherent(design: &DesignSpec, entries: &[MddEntry]) -> bool {
    let prevalence = design.prevalence().value();
    let implied_full = prevalence * design.d_s() + (1.0 - prevalence) * design.d_c();
    entries
        .iter()
        .filter(|e| e.stage == Stage::Two)
        .all(|e| match e.population {
            Population::Subgroup => e.delta > design.d_s(),
            Population::Full => e.delta > implied_full,
        })
}

fn validate(request: &MddRequest) -> Result<(), MddError> {
    match (request.stage, request.continuation, request.population) {
        (Stage::One, Continuation::NotApplicable, _) => Ok(()),
        (Stage::One, c, _) => Err(MddError::InvalidRequest(format!(
            "stage-1 requests take no continuation, got {c:?}"
        ))),
        (Stage::Two, Continuation::NotApplicable, _) => Err(MddError::InvalidRequest(
            "stage-2 requests need a continuation configuration".into(),
        )),
        (Stage::Two, Continuation::SubgroupOnly, Population::Full) => Err(
            MddError::InvalidRequest("F is not tested when only S continues".into()),
        ),
        (Stage::Two, Continuation::FullOnly, Population::Subgroup) => Err(
            MddError::InvalidRequest("S is not tested when only F continues".into()),
        ),
        (Stage::Two, _, _) => Ok(()),
    }
}

fn check_rate_and_level(control_rate: Probability, level: Probability) -> Result<(), MddError> {
    let rate = control_rate.value();
    if !(rate > 0.0 && rate < 1.0) {
        return Err(MddError::InvalidRequest(format!(
            "control rate must lie strictly in (0, 1), got {rate}"
        )));
    }
    let l = level.value();
    if !(l > 0.0 && l < 0.5) {
        return Err(MddError::InvalidRequest(format!(
            "level must lie in (0, 0.5), got {l}"
        )));
    }
    Ok(())
}

fn stage1_arms(design: &DesignSpec, population: Population) -> (f64, f64) {
    let n = match population {
        Population::Subgroup => design.subgroup_size(design.n1()),
        Population::Full => design.n1(),
    };
    let (e, c) = design.split_arms(n);
    (f64::from(e), f64::from(c))
}

fn stage2_arms(design: &DesignSpec, population: Population, continuation: Continuation) -> (f64, f64) {
    // enrichment sends all n2 subjects to S; otherwise F enrolls n2 with S
    // at its planned prevalence share
    let n = match (continuation, population) {
        (Continuation::SubgroupOnly, Population::Subgroup) => design.n2(),
        (Continuation::FullOnly, Population::Full) => design.n2(),
        (Continuation::Both, Population::Full) => design.n2(),
        (Continuation::Both, Population::Subgroup) => design.subgroup_size(design.n2()),
        _ => unreachable!("rejected by validate"),
    };
    let (e, c) = design.split_arms(n);
    (f64::from(e), f64::from(c))
}

fn adjust(p: f64, double_it: bool) -> Probability {
    let v = if double_it { (2.0 * p).min(1.0) } else { p };
    Probability::new_unchecked(v)
}

// Solves target(delta) = level for delta in (0, 1 - control_rate]; the
// target must be nonincreasing in delta with target(0) = 0.5.
fn solve_delta(
    level: f64,
    control_rate: f64,
    target: impl Fn(f64, f64) -> f64,
) -> Result<f64, MddError> {
    let max_delta = 1.0 - control_rate;
    let residual = |delta: f64| target(delta, control_rate) - level;
    if residual(max_delta) > 0.0 {
        return Err(MddError::Infeasible { level, max_delta });
    }
    Ok(brent(residual, 0.0, max_delta, DELTA_TOL)?)
}

fn stage1_assumptions(request: &MddRequest) -> String {
    let own = request.population.label();
    let other = other_label(request.population);
    if request.conservative {
        format!(
            "control rate fixed at {}; {own} alone drives the intersection test \
             (adjusted p-value 2p at stage 1)",
            request.control_rate
        )
    } else {
        format!(
            "control rate fixed at {}; valid only if {other} also rejects with the \
             smaller p-value (raw p-value at stage 1)",
            request.control_rate
        )
    }
}

fn stage2_assumptions(request: &MddRequest) -> String {
    let own = request.population.label();
    let other = other_label(request.population);
    let shared = format!(
        "control rate fixed at {}; observed proportions identical across stages",
        request.control_rate
    );
    match request.continuation {
        Continuation::SubgroupOnly | Continuation::FullOnly => format!(
            "{shared}; {own} alone drives the stage-1 intersection test \
             (adjusted stage-1 p-value, raw stage-2 p-value)"
        ),
        Continuation::Both if request.conservative => format!(
            "{shared}; {own} alone drives the intersection test in both stages \
             (both p-values adjusted)"
        ),
        Continuation::Both => format!(
            "{shared}; valid only if {other} drives the intersection test in both \
             stages (raw p-values)"
        ),
        Continuation::NotApplicable => unreachable!("rejected by validate"),
    }
}

fn other_label(population: Population) -> &'static str {
    match population {
        Population::Subgroup => Population::Full.label(),
        Population::Full => Population::Subgroup.label(),
    }
}
