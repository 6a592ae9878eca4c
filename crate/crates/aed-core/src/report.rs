//! Rendering of boundaries, MDD grids, and operating characteristics into
//! aligned text tables, CSV, and JSON.
//!
//! Text output rounds probabilities to two decimals for reading; CSV and
//! JSON carry full precision and round-trip exactly. Column ordering and
//! header names are stable across releases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adaptive::InterimDecision;
use crate::boundaries::BoundaryPair;
use crate::design::DesignSpec;
use crate::mdd::{Continuation, MddEntry, Population};
use crate::sim::{ConditionalPower, OperatingCharacteristics};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("bundle has no {0} table")]
    MissingTable(&'static str),
    #[error("render failed: {0}")]
    Render(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    Decisions,
    Power,
    ConditionalPower,
    Mdd,
    Boundaries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// Provenance attached to every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub n_reps: u64,
    pub design_fingerprint: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
}

impl RunMetadata {
    pub fn new(design: &DesignSpec, seed: u64, n_reps: u64) -> Self {
        RunMetadata {
            seed,
            n_reps,
            design_fingerprint: design_fingerprint(design),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: None,
        }
    }

    pub fn with_timestamp(mut self, timestamp: impl Into<String>) -> Self {
        self.timestamp = Some(timestamp.into());
        self
    }
}

/// FNV-1a hash of the canonical design serialization, as a 16-digit hex tag.
pub fn design_fingerprint(design: &DesignSpec) -> String {
    let canonical = serde_json::to_string(design).expect("design serializes");
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Operating characteristics for one (scenario, threshold set) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCell {
    pub scenario: String,
    pub thresholds: String,
    pub oc: OperatingCharacteristics,
}

/// Everything a report can draw from. Sections are optional; requesting a
/// table whose section is absent is a structured error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub metadata: RunMetadata,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundaries: Option<BoundaryPair>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mdd: Option<Vec<MddEntry>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simulations: Option<Vec<SimulationCell>>,
}

impl ReportBundle {
    pub fn new(metadata: RunMetadata) -> Self {
        ReportBundle { metadata, boundaries: None, mdd: None, simulations: None }
    }

    pub fn with_boundaries(mut self, boundaries: BoundaryPair) -> Self {
        self.boundaries = Some(boundaries);
        self
    }

    pub fn with_mdd(mut self, entries: Vec<MddEntry>) -> Self {
        self.mdd = Some(entries);
        self
    }

    pub fn with_simulations(mut self, cells: Vec<SimulationCell>) -> Self {
        self.simulations = Some(cells);
        self
    }
}

// Flat rows shared by the CSV and JSON renderings.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRow {
    pub scenario: String,
    pub thresholds: String,
    pub decision: String,
    pub frequency: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario: String,
    pub thresholds: String,
    pub measure: String,
    pub value: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPowerRow {
    pub scenario: String,
    pub thresholds: String,
    pub measure: String,
    pub value: Option<f64>,
    pub mc_se: Option<f64>,
    pub denominator: u64,
}

/// Result of the single-stage all-comers power computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPowerResult {
    pub n_total: u32,
    pub pi2: f64,
    pub effect: f64,
    pub dropout: f64,
    pub alpha: f64,
    pub power: f64,
    pub mc_se: f64,
}

/// JSON document shape: metadata plus the rendered table section(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub metadata: RunMetadata,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub boundaries: Option<BoundaryPair>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mdd: Option<Vec<MddEntry>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decisions: Option<Vec<DecisionRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub power: Option<Vec<PowerRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub conditional_power: Option<Vec<ConditionalPowerRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fixed_power: Option<FixedPowerResult>,
}

const POWER_MEASURES: [&str; 4] = ["Power F", "Power S", "Power (F or S)", "Power (F and S)"];
const CP_MEASURES: [&str; 3] = [
    "CP F if only F tested in stage 2",
    "CP S if only S tested in stage 2",
    "CP (F or S) if F and S tested in stage 2",
];

fn power_values(oc: &OperatingCharacteristics) -> [f64; 4] {
    [oc.power_full, oc.power_subgroup, oc.power_either, oc.power_both]
}

fn cp_values(oc: &OperatingCharacteristics) -> [ConditionalPower; 3] {
    [oc.cond_power_full_only, oc.cond_power_subgroup_only, oc.cond_power_both]
}

/// Renders one table of the bundle in the requested format.
pub fn render_table(
    bundle: &ReportBundle,
    which: TableKind,
    format: OutputFormat,
) -> Result<Vec<u8>, ReportError> {
    match which {
        TableKind::Boundaries => {
            let b = bundle.boundaries.as_ref().ok_or(ReportError::MissingTable("boundaries"))?;
            Ok(match format {
                OutputFormat::Text => boundaries_text(b).into_bytes(),
                OutputFormat::Csv => boundaries_csv(&bundle.metadata, b)?,
                OutputFormat::Json => {
                    json_report(&bundle.metadata, |r| r.boundaries = Some(*b))?
                }
            })
        }
        TableKind::Mdd => {
            let entries = bundle.mdd.as_ref().ok_or(ReportError::MissingTable("mdd"))?;
            Ok(match format {
                OutputFormat::Text => mdd_text(entries).into_bytes(),
                OutputFormat::Csv => mdd_csv(&bundle.metadata, entries)?,
                OutputFormat::Json => {
                    json_report(&bundle.metadata, |r| r.mdd = Some(entries.clone()))?
                }
            })
        }
        TableKind::Decisions => {
            let cells = simulation_cells(bundle)?;
            Ok(match format {
                OutputFormat::Text => decisions_text(cells).into_bytes(),
                OutputFormat::Csv => decisions_csv(&bundle.metadata, cells)?,
                OutputFormat::Json => {
                    json_report(&bundle.metadata, |r| r.decisions = Some(decision_rows(cells)))?
                }
            })
        }
        TableKind::Power => {
            let cells = simulation_cells(bundle)?;
            Ok(match format {
                OutputFormat::Text => power_text(cells).into_bytes(),
                OutputFormat::Csv => power_csv(&bundle.metadata, cells)?,
                OutputFormat::Json => {
                    json_report(&bundle.metadata, |r| r.power = Some(power_rows(cells)))?
                }
            })
        }
        TableKind::ConditionalPower => {
            let cells = simulation_cells(bundle)?;
            Ok(match format {
                OutputFormat::Text => conditional_power_text(cells).into_bytes(),
                OutputFormat::Csv => conditional_power_csv(&bundle.metadata, cells)?,
                OutputFormat::Json => json_report(&bundle.metadata, |r| {
                    r.conditional_power = Some(conditional_power_rows(cells))
                })?,
            })
        }
    }
}

fn simulation_cells(bundle: &ReportBundle) -> Result<&[SimulationCell], ReportError> {
    bundle
        .simulations
        .as_deref()
        .ok_or(ReportError::MissingTable("simulations"))
}

/// Renders the decision, power, and conditional-power tables as one
/// document: consecutive tables in text mode, `# table=` delimited sections
/// in CSV, and a single object with three arrays in JSON.
pub fn render_simulation_report(
    bundle: &ReportBundle,
    format: OutputFormat,
) -> Result<Vec<u8>, ReportError> {
    let cells = simulation_cells(bundle)?;
    match format {
        OutputFormat::Text => {
            let mut out = decisions_text(cells);
            out.push('\n');
            out.push_str(&power_text(cells));
            out.push('\n');
            out.push_str(&conditional_power_text(cells));
            Ok(out.into_bytes())
        }
        OutputFormat::Csv => {
            let mut out = Vec::new();
            for (kind, name) in [
                (TableKind::Decisions, "decisions"),
                (TableKind::Power, "power"),
                (TableKind::ConditionalPower, "conditional_power"),
            ] {
                out.extend_from_slice(format!("# table={name}\n").as_bytes());
                out.extend(render_table(bundle, kind, OutputFormat::Csv)?);
            }
            Ok(out)
        }
        OutputFormat::Json => json_report(&bundle.metadata, |r| {
            r.decisions = Some(decision_rows(cells));
            r.power = Some(power_rows(cells));
            r.conditional_power = Some(conditional_power_rows(cells));
        }),
    }
}

/// Renders the single-stage all-comers power result.
pub fn render_fixed_power(
    metadata: &RunMetadata,
    result: &FixedPowerResult,
    format: OutputFormat,
) -> Result<Vec<u8>, ReportError> {
    match format {
        OutputFormat::Text => Ok(format!(
            "Fixed-design power (single stage, all comers)\n\
             {:<10} {:<6} {:<7} {:<8} {:<7} power\n\
             {:<10} {:<6} {:<7} {:<8} {:<7} {:.2}\n",
            "n_total", "pi2", "effect", "dropout", "alpha",
            result.n_total, result.pi2, result.effect, result.dropout, result.alpha,
            result.power,
        )
        .into_bytes()),
        OutputFormat::Csv => finish_csv(csv_writer(metadata), |w| {
            w.write_record([
                "n_total", "pi2", "effect", "dropout", "alpha", "power", "mc_se",
            ])?;
            w.write_record([
                result.n_total.to_string(),
                result.pi2.to_string(),
                result.effect.to_string(),
                result.dropout.to_string(),
                result.alpha.to_string(),
                result.power.to_string(),
                result.mc_se.to_string(),
            ])
        }),
        OutputFormat::Json => {
            json_report(metadata, |r| r.fixed_power = Some(result.clone()))
        }
    }
}

fn json_report(
    metadata: &RunMetadata,
    fill: impl FnOnce(&mut JsonReport),
) -> Result<Vec<u8>, ReportError> {
    let mut report = JsonReport {
        metadata: metadata.clone(),
        boundaries: None,
        mdd: None,
        decisions: None,
        power: None,
        conditional_power: None,
    };
    fill(&mut report);
    let mut bytes =
        serde_json::to_vec_pretty(&report).map_err(|e| ReportError::Render(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn decision_rows(cells: &[SimulationCell]) -> Vec<DecisionRow> {
    let mut rows = Vec::new();
    for cell in cells {
        for d in InterimDecision::ALL {
            let f = cell.oc.decision_freq.get(d);
            rows.push(DecisionRow {
                scenario: cell.scenario.clone(),
                thresholds: cell.thresholds.clone(),
                decision: d.label().to_string(),
                frequency: f,
                mc_se: cell.oc.mc_se(f),
            });
        }
    }
    rows
}

fn power_rows(cells: &[SimulationCell]) -> Vec<PowerRow> {
    let mut rows = Vec::new();
    for cell in cells {
        for (measure, value) in POWER_MEASURES.iter().zip(power_values(&cell.oc)) {
            rows.push(PowerRow {
                scenario: cell.scenario.clone(),
                thresholds: cell.thresholds.clone(),
                measure: measure.to_string(),
                value,
                mc_se: cell.oc.mc_se(value),
            });
        }
    }
    rows
}

fn conditional_power_rows(cells: &[SimulationCell]) -> Vec<ConditionalPowerRow> {
    let mut rows = Vec::new();
    for cell in cells {
        for (measure, cp) in CP_MEASURES.iter().zip(cp_values(&cell.oc)) {
            rows.push(ConditionalPowerRow {
                scenario: cell.scenario.clone(),
                thresholds: cell.thresholds.clone(),
                measure: measure.to_string(),
                value: cp.estimate,
                mc_se: cp.mc_se(),
                denominator: cp.denominator,
            });
        }
    }
    rows
}

// --- CSV ---------------------------------------------------------------

fn csv_writer(metadata: &RunMetadata) -> Vec<u8> {
    let mut head = format!(
        "# seed={} reps={} design={} tool=aed-core/{}\n",
        metadata.seed, metadata.n_reps, metadata.design_fingerprint, metadata.version
    );
    if let Some(ts) = &metadata.timestamp {
        head.push_str(&format!("# timestamp={ts}\n"));
    }
    head.into_bytes()
}

fn finish_csv(
    mut bytes: Vec<u8>,
    write: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::Writer::from_writer(&mut bytes);
    write(&mut w).map_err(|e| ReportError::Render(e.to_string()))?;
    w.flush().map_err(|e| ReportError::Render(e.to_string()))?;
    drop(w);
    Ok(bytes)
}

fn boundaries_csv(metadata: &RunMetadata, b: &BoundaryPair) -> Result<Vec<u8>, ReportError> {
    finish_csv(csv_writer(metadata), |w| {
        w.write_record(["alpha_total", "alpha1", "alpha2", "z1", "z2", "t1"])?;
        w.write_record([
            b.alpha_total.value().to_string(),
            b.alpha1.value().to_string(),
            b.alpha2.value().to_string(),
            b.z1.value().to_string(),
            b.z2.value().to_string(),
            b.t1.to_string(),
        ])
    })
}

fn mdd_csv(metadata: &RunMetadata, entries: &[MddEntry]) -> Result<Vec<u8>, ReportError> {
    finish_csv(csv_writer(metadata), |w| {
        w.write_record([
            "stage",
            "population",
            "continuation",
            "conservative",
            "control_rate",
            "delta",
            "assumptions",
        ])?;
        for e in entries {
            w.write_record([
                stage_key(e.stage),
                e.population.label(),
                continuation_key(e.continuation),
                if e.conservative { "true" } else { "false" },
                &e.control_rate.to_string(),
                &e.delta.to_string(),
                &e.assumptions,
            ])?;
        }
        Ok(())
    })
}

fn decisions_csv(metadata: &RunMetadata, cells: &[SimulationCell]) -> Result<Vec<u8>, ReportError> {
    finish_csv(csv_writer(metadata), |w| {
        w.write_record(["scenario", "thresholds", "decision", "frequency", "mc_se"])?;
        for row in decision_rows(cells) {
            w.write_record([
                row.scenario,
                row.thresholds,
                row.decision,
                row.frequency.to_string(),
                row.mc_se.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn power_csv(metadata: &RunMetadata, cells: &[SimulationCell]) -> Result<Vec<u8>, ReportError> {
    finish_csv(csv_writer(metadata), |w| {
        w.write_record(["scenario", "thresholds", "measure", "value", "mc_se"])?;
        for row in power_rows(cells) {
            w.write_record([
                row.scenario,
                row.thresholds,
                row.measure,
                row.value.to_string(),
                row.mc_se.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn conditional_power_csv(
    metadata: &RunMetadata,
    cells: &[SimulationCell],
) -> Result<Vec<u8>, ReportError> {
    finish_csv(csv_writer(metadata), |w| {
        w.write_record(["scenario", "thresholds", "measure", "value", "mc_se", "denominator"])?;
        for row in conditional_power_rows(cells) {
            w.write_record([
                row.scenario,
                row.thresholds,
                row.measure,
                row.value.map(|v| v.to_string()).unwrap_or_default(),
                row.mc_se.map(|v| v.to_string()).unwrap_or_default(),
                row.denominator.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn stage_key(stage: crate::adaptive::Stage) -> &'static str {
    match stage {
        crate::adaptive::Stage::One => "1",
        crate::adaptive::Stage::Two => "2",
    }
}

fn continuation_key(c: Continuation) -> &'static str {
    match c {
        Continuation::SubgroupOnly => "s_only",
        Continuation::FullOnly => "f_only",
        Continuation::Both => "both",
        Continuation::NotApplicable => "none",
    }
}

// --- text --------------------------------------------------------------

fn boundaries_text(b: &BoundaryPair) -> String {
    let mut out = String::new();
    out.push_str("Two-look group-sequential boundary levels\n");
    out.push_str(&format!("  alpha_total  {:<8.4}\n", b.alpha_total.value()));
    out.push_str(&format!(
        "  alpha1       {:<8.4} z1  {:.4}\n",
        b.alpha1.value(),
        b.z1.value()
    ));
    out.push_str(&format!(
        "  alpha2       {:<8.4} z2  {:.4}\n",
        b.alpha2.value(),
        b.z2.value()
    ));
    out.push_str(&format!("  t1           {:<8.4}\n", b.t1));
    out
}

fn grid_text(
    title: &str,
    row_labels: &[String],
    cells: &[SimulationCell],
    value: impl Fn(&SimulationCell, usize) -> String,
) -> String {
    let label_width = row_labels.iter().map(|l| l.len()).max().unwrap_or(0).max(8);
    let headers: Vec<String> =
        cells.iter().map(|c| format!("{}/{}", c.scenario, c.thresholds)).collect();
    let col_widths: Vec<usize> = headers.iter().map(|h| h.len().max(6)).collect();

    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    out.push_str(&format!("{:<label_width$}", ""));
    for (h, w) in headers.iter().zip(&col_widths) {
        out.push_str(&format!("  {h:>w$}"));
    }
    out.push('\n');
    for (i, label) in row_labels.iter().enumerate() {
        out.push_str(&format!("{label:<label_width$}"));
        for (cell, w) in cells.iter().zip(&col_widths) {
            out.push_str(&format!("  {:>w$}", value(cell, i)));
        }
        out.push('\n');
    }
    out
}

fn decisions_text(cells: &[SimulationCell]) -> String {
    let labels: Vec<String> =
        InterimDecision::ALL.iter().map(|d| d.label().to_string()).collect();
    grid_text("Relative frequencies of interim decisions", &labels, cells, |cell, i| {
        format!("{:.2}", cell.oc.decision_freq.get(InterimDecision::ALL[i]))
    })
}

fn power_text(cells: &[SimulationCell]) -> String {
    let labels: Vec<String> = POWER_MEASURES.iter().map(|m| m.to_string()).collect();
    grid_text("Overall power", &labels, cells, |cell, i| {
        format!("{:.2}", power_values(&cell.oc)[i])
    })
}

fn conditional_power_text(cells: &[SimulationCell]) -> String {
    let labels: Vec<String> = CP_MEASURES.iter().map(|m| m.to_string()).collect();
    grid_text(
        "Conditional power given stage-2 activation",
        &labels,
        cells,
        |cell, i| match cp_values(&cell.oc)[i].estimate {
            Some(v) => format!("{v:.2}"),
            None => "-".to_string(),
        },
    )
}

fn mdd_text(entries: &[MddEntry]) -> String {
    use crate::adaptive::Stage;

    let find = |stage: Stage, pop: Population, cont: Continuation, cons: bool| {
        entries
            .iter()
            .find(|e| {
                e.stage == stage
                    && e.population == pop
                    && e.continuation == cont
                    && e.conservative == cons
            })
            .map(|e| e.delta)
    };
    let pair = |stage, pop, cont| {
        let conservative = find(stage, pop, cont, true);
        let liberal = find(stage, pop, cont, false);
        match (conservative, liberal) {
            (Some(c), Some(l)) => format!("{c:.2} [{l:.2}]"),
            (Some(c), None) => format!("{c:.2}"),
            (None, Some(l)) => format!("[{l:.2}]"),
            (None, None) => String::new(),
        }
    };

    let rate = entries.first().map(|e| e.control_rate).unwrap_or(f64::NAN);
    let rows = [
        ("Stage 1".to_string(),
            pair(Stage::One, Population::Subgroup, Continuation::NotApplicable),
            pair(Stage::One, Population::Full, Continuation::NotApplicable)),
        ("Stage 2".to_string(), String::new(), String::new()),
        (format!("- {}", Continuation::SubgroupOnly.label()),
            pair(Stage::Two, Population::Subgroup, Continuation::SubgroupOnly),
            String::new()),
        (format!("- {}", Continuation::FullOnly.label()),
            String::new(),
            pair(Stage::Two, Population::Full, Continuation::FullOnly)),
        (format!("- {}", Continuation::Both.label()),
            pair(Stage::Two, Population::Subgroup, Continuation::Both),
            pair(Stage::Two, Population::Full, Continuation::Both)),
    ];

    let label_width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let mut out = format!("Minimal detectable differences (control rate {rate})\n");
    out.push_str(&format!(
        "{:<label_width$}  {:>12}  {:>12}\n",
        "stage", "subgroup S", "full pop. F"
    ));
    for (label, s, f) in rows {
        out.push_str(&format!("{label:<label_width$}  {s:>12}  {f:>12}\n"));
    }
    out.push_str("values in brackets apply when the other population drives the intersection test\n");
    out
}
