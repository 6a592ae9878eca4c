//! TOML run configuration.
//!
//! Every field is optional; omitted values take the case-study defaults, so
//! an empty document reproduces the published design: n₁ = 205, n₂ = 120,
//! one-sided α = 0.025 with half spent at stage 1, prevalence 0.47, dropout
//! 0.05, thresholds d_S = 0.12 / d_C = 0.10, the three published scenarios,
//! and both published threshold sets.

use std::fmt;

use aed_core::{BiomarkerSampling, DesignSpec, Probability, ScenarioSpec};
use serde::Deserialize;

use crate::OutputFormatArg;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError(message.into())
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub design: DesignSpec,
    pub scenarios: Vec<(String, ScenarioSpec)>,
    pub threshold_sets: Vec<(String, f64, f64)>,
    pub n_reps: u64,
    pub seed: u64,
    pub format: OutputFormatArg,
    pub out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    design: Option<RawDesign>,
    scenarios: Option<Vec<RawScenario>>,
    threshold_sets: Option<Vec<RawThresholds>>,
    run: Option<RawRun>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    n1: Option<u32>,
    n2: Option<u32>,
    alloc_ratio: Option<f64>,
    alpha_total: Option<f64>,
    alpha1: Option<f64>,
    stage1_spend: Option<f64>,
    w1: Option<f64>,
    w2: Option<f64>,
    prevalence: Option<f64>,
    dropout: Option<f64>,
    d_s: Option<f64>,
    d_c: Option<f64>,
    biomarker_sampling: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    label: Option<String>,
    pi2: f64,
    effect_s: f64,
    effect_c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    label: Option<String>,
    d_s: f64,
    d_c: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    n_reps: Option<u64>,
    seed: Option<u64>,
    format: Option<String>,
    out: Option<String>,
}

pub const DEFAULT_REPS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;

/// Parses and validates a configuration document.
pub fn parse_config(source: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        toml::from_str(source).map_err(|e| err(format!("config parse error: {e}")))?;

    let d = raw.design.unwrap_or_default();
    let mut builder = aed_core::DesignSpec::builder();
    if let (Some(n1), Some(n2)) = (d.n1.or(Some(205)), d.n2.or(Some(120))) {
        builder = builder.stage_sizes(n1, n2);
    }
    if let Some(r) = d.alloc_ratio {
        builder = builder.alloc_ratio(r);
    }
    if let Some(a) = d.alpha_total {
        builder = builder.alpha_total(a);
    }
    if let Some(s) = d.stage1_spend {
        builder = builder.stage1_spend(s);
    }
    if let Some(a1) = d.alpha1 {
        builder = builder.alpha1(a1);
    }
    match (d.w1, d.w2) {
        (Some(w1), Some(w2)) => builder = builder.weights(w1, w2),
        (None, None) => {}
        _ => return Err(err("design.w1/design.w2: both weights must be given together")),
    }
    if let Some(p) = d.prevalence {
        builder = builder.prevalence(p);
    }
    if let Some(p) = d.dropout {
        builder = builder.dropout(p);
    }
    match (d.d_s, d.d_c) {
        (Some(ds), Some(dc)) => builder = builder.thresholds(ds, dc),
        (Some(ds), None) => builder = builder.thresholds(ds, 0.10),
        (None, Some(dc)) => builder = builder.thresholds(0.12, dc),
        (None, None) => {}
    }
    if let Some(mode) = &d.biomarker_sampling {
        let sampling = match mode.as_str() {
            "planned" | "planned_counts" => BiomarkerSampling::PlannedCounts,
            "stochastic" => BiomarkerSampling::Stochastic,
            other => {
                return Err(err(format!(
                    "design.biomarker_sampling: expected \"planned\" or \"stochastic\", got \"{other}\""
                )))
            }
        };
        builder = builder.biomarker_sampling(sampling);
    }
    let design = builder.build().map_err(|e| err(format!("design.{e}")))?;

    let scenarios = match raw.scenarios {
        None => default_scenarios(),
        Some(list) if list.is_empty() => {
            return Err(err("scenarios: at least one scenario is required"))
        }
        Some(list) => {
            let mut out = Vec::with_capacity(list.len());
            for (i, s) in list.iter().enumerate() {
                let pi2 = Probability::new(s.pi2)
                    .map_err(|_| err(format!("scenarios[{i}].pi2: must lie in [0, 1], got {}", s.pi2)))?;
                let spec = ScenarioSpec::new(pi2, s.effect_s, s.effect_c)
                    .map_err(|e| err(format!("scenarios[{i}]: {e}")))?;
                let label = s.label.clone().unwrap_or_else(|| format!("scenario-{}", i + 1));
                out.push((label, spec));
            }
            out
        }
    };

    let threshold_sets = match raw.threshold_sets {
        None => default_threshold_sets(),
        Some(list) if list.is_empty() => {
            return Err(err("threshold_sets: at least one threshold set is required"))
        }
        Some(list) => {
            let mut out = Vec::with_capacity(list.len());
            for (i, t) in list.iter().enumerate() {
                for (name, v) in [("d_s", t.d_s), ("d_c", t.d_c)] {
                    if !v.is_finite() || v.abs() >= 1.0 {
                        return Err(err(format!(
                            "threshold_sets[{i}].{name}: must lie in (-1, 1), got {v}"
                        )));
                    }
                }
                let label = t.label.clone().unwrap_or_else(|| format!("thresholds-{}", i + 1));
                out.push((label, t.d_s, t.d_c));
            }
            out
        }
    };

    let run = raw.run.unwrap_or_default();
    let n_reps = run.n_reps.unwrap_or(DEFAULT_REPS);
    if n_reps == 0 {
        return Err(err("run.n_reps: must be at least 1"));
    }
    let format = match run.format.as_deref() {
        None => OutputFormatArg::Text,
        Some("text") => OutputFormatArg::Text,
        Some("csv") => OutputFormatArg::Csv,
        Some("json") => OutputFormatArg::Json,
        Some(other) => {
            return Err(err(format!(
                "run.format: expected \"text\", \"csv\" or \"json\", got \"{other}\""
            )))
        }
    };

    Ok(RunConfig {
        design,
        scenarios,
        threshold_sets,
        n_reps,
        seed: run.seed.unwrap_or(DEFAULT_SEED),
        format,
        out: run.out,
    })
}

fn default_scenarios() -> Vec<(String, ScenarioSpec)> {
    let pi2 = Probability::new(0.48).expect("valid");
    [(0.20, 0.20), (0.20, 0.12), (0.20, 0.04)]
        .iter()
        .enumerate()
        .map(|(i, (effect_s, effect_c))| {
            (
                format!("scenario-{}", i + 1),
                ScenarioSpec::new(pi2, *effect_s, *effect_c).expect("valid"),
            )
        })
        .collect()
}

fn default_threshold_sets() -> Vec<(String, f64, f64)> {
    vec![
        ("planned".to_string(), 0.12, 0.10),
        ("aggressive".to_string(), 0.15, 0.12),
    ]
}
