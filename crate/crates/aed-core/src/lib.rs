//! Two-stage adaptive enrichment designs with a binary endpoint and one
//! dichotomous biomarker subgroup.
//!
//! The design randomizes a first stage in the full population F with the
//! biomarker-positive subgroup S as a co-primary population. An interim
//! analysis may stop for efficacy (closed testing with a Simes intersection
//! at the stage-1 level), stop for futility, or continue into a second
//! stage with S, with F, or with both, based on observed risk differences.
//! Stage-wise p-values are combined with pre-specified inverse-normal
//! weights, which keeps the familywise error controlled in the strong sense
//! no matter which population the interim selects.
//!
//! What's here:
//!
//! - [`norm`]: standard-normal CDF/quantile and the bivariate upper-orthant
//!   probability.
//! - [`ztest`]: the pooled one-sided z-test for two proportions.
//! - [`boundaries`]: the two-look group-sequential level solver.
//! - [`adaptive`]: Simes intersection, inverse-normal combination, and the
//!   interim/final decision rules.
//! - [`mdd`]: minimal detectable differences on the risk-difference scale.
//! - [`sim`]: Monte Carlo operating characteristics with deterministic
//!   parallel replication streams.
//! - [`report`]: text/CSV/JSON rendering of the result tables.
//!
//! ```
//! use aed_core::{DesignSpec, solve_boundaries};
//!
//! let design = DesignSpec::default(); // the IMpassion031 parameterization
//! let b = solve_boundaries(
//!     design.alpha_total(),
//!     design.alpha1(),
//!     design.information_fraction(),
//! )?;
//! assert!((b.alpha2.value() - 0.0184).abs() < 1e-4);
//! # Ok::<(), aed_core::BoundaryError>(())
//! ```
//!
//! The `book/` directory of the repository is an mdBook guide whose code
//! snippets compile and run as doc-tests of this crate.

pub mod adaptive;
pub mod boundaries;
pub mod design;
pub mod mdd;
pub mod norm;
pub mod report;
pub mod sim;
pub mod solve;
pub mod ztest;

pub use adaptive::{
    combine, final_decide, final_decide_from, interim_decide, interim_decide_from, simes_p,
    stage_p_values, FinalRejections, InterimDecision, Stage, StageData, StagePValues,
    SubgroupData, Tally,
};
pub use boundaries::{solve_boundaries, solve_boundaries_with_spend, BoundaryError, BoundaryPair};
pub use design::{BiomarkerSampling, DesignBuilder, DesignError, DesignSpec};
pub use mdd::{
    futility_coherent, mdd_single_stage, mdd_stage1, mdd_stage2, mdd_table, Continuation,
    MddEntry, MddError, MddRequest, MddResult, Population,
};
pub use norm::{
    bivariate_upper_orthant, std_normal_cdf, std_normal_quantile, DistError, Probability, ZScore,
};
pub use report::{
    design_fingerprint, render_fixed_power, render_simulation_report, render_table,
    FixedPowerResult, OutputFormat, ReportBundle, ReportError, RunMetadata, SimulationCell,
    TableKind,
};
pub use sim::{
    fixed_design_power, mc_standard_error, replication_stream, run_simulation, simulate_trial,
    OperatingCharacteristics, ScenarioSpec, SimError, TrialOutcome,
};
pub use ztest::{one_sided_p, pooled_z, ArmCounts, CountError};

// The mdBook chapters double as doc-tests so the guide can never drift from
// the library. Collected only under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/design.md")]
    mod design {}
    #[doc = include_str!("../../../book/src/testing.md")]
    mod testing {}
    #[doc = include_str!("../../../book/src/boundaries.md")]
    mod boundaries {}
    #[doc = include_str!("../../../book/src/mdd.md")]
    mod mdd {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
