//! `aed` — planning and simulation of a two-stage adaptive enrichment
//! design with a binary endpoint and one biomarker subgroup.
//!
//! Subcommands: `boundaries` (group-sequential levels), `mdd` (minimal
//! detectable differences), `simulate` (operating characteristics over
//! every scenario × threshold-set cell), and `fixed-power` (single-stage
//! reference design). Run without a config file to get the published
//! case-study parameterization.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration error,
//! 3 numerical infeasibility.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use aed_core::{
    fixed_design_power, mc_standard_error, mdd_table, render_fixed_power,
    render_simulation_report, render_table, run_simulation, solve_boundaries, DesignSpec,
    FixedPowerResult, OutputFormat, Probability, ReportBundle, RunMetadata, SimulationCell,
    TableKind,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{parse_config, RunConfig};

#[derive(Parser)]
#[command(
    name = "aed",
    version,
    about = "Two-stage adaptive enrichment design: boundaries, detectable differences, and Monte Carlo operating characteristics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the two-look local significance levels.
    Boundaries(CommonArgs),
    /// Minimal detectable differences for both stages and all continuations.
    Mdd(MddArgs),
    /// Simulate operating characteristics for every scenario and threshold set.
    Simulate(SimulateArgs),
    /// Power of the single-stage all-comers reference design.
    FixedPower(FixedPowerArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file; omitted fields take the case-study defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for the replication streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo replications.
    #[arg(long)]
    reps: Option<u64>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormatArg>,
    /// Output path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record a UTC timestamp in CSV/JSON metadata.
    #[arg(long)]
    stamp: bool,
}

#[derive(Args)]
struct MddArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Nuisance control-arm rate; default is the dropout-thinned
    /// hypothesized control rate of the first scenario.
    #[arg(long)]
    control_rate: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Worker threads for the replication loop (default: all cores).
    /// Results are bit-identical for any thread count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct FixedPowerArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Total sample size of the single-stage design.
    #[arg(long, default_value_t = 204)]
    n_total: u32,
    /// True control-arm response rate.
    #[arg(long, default_value_t = 0.48)]
    pi2: f64,
    /// True treatment effect (risk difference).
    #[arg(long, default_value_t = 0.20)]
    effect: f64,
    /// Dropout rate (default: the design's).
    #[arg(long)]
    dropout: Option<f64>,
    /// One-sided significance level (default: the design's total level).
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OutputFormatArg {
    Text,
    Csv,
    Json,
}

impl From<OutputFormatArg> for OutputFormat {
    fn from(f: OutputFormatArg) -> OutputFormat {
        match f {
            OutputFormatArg::Text => OutputFormat::Text,
            OutputFormatArg::Csv => OutputFormat::Csv,
            OutputFormatArg::Json => OutputFormat::Json,
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError { code: 2, message: message.into() }
}

fn numeric_error(message: impl Into<String>) -> CliError {
    CliError { code: 3, message: message.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are successful exits; everything else is
            // a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Boundaries(args) => {
            let (cfg, metadata) = load(&args)?;
            let boundaries = solve(&cfg.design)?;
            let bundle = ReportBundle::new(metadata).with_boundaries(boundaries);
            let bytes = render_table(&bundle, TableKind::Boundaries, format_of(&args, &cfg))
                .map_err(|e| numeric_error(e.to_string()))?;
            emit(&args, &cfg, bytes)
        }
        Command::Mdd(args) => {
            let (cfg, metadata) = load(&args.common)?;
            let boundaries = solve(&cfg.design)?;
            let rate = match args.control_rate {
                Some(r) => r,
                None => {
                    let pi2 = cfg.scenarios[0].1.pi2().value();
                    (1.0 - cfg.design.dropout().value()) * pi2
                }
            };
            let rate = Probability::new(rate)
                .map_err(|_| config_error(format!("control rate must lie in [0, 1], got {rate}")))?;
            let entries = mdd_table(&cfg.design, &boundaries, rate)
                .map_err(|e| numeric_error(e.to_string()))?;
            let bundle = ReportBundle::new(metadata).with_mdd(entries);
            let bytes = render_table(&bundle, TableKind::Mdd, format_of(&args.common, &cfg))
                .map_err(|e| numeric_error(e.to_string()))?;
            emit(&args.common, &cfg, bytes)
        }
        Command::Simulate(args) => {
            let (cfg, metadata) = load(&args.common)?;
            let bytes = match args.threads {
                None => simulate(&args.common, &cfg, metadata)?,
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| config_error(format!("thread pool: {e}")))?
                    .install(|| simulate(&args.common, &cfg, metadata))?,
            };
            emit(&args.common, &cfg, bytes)
        }
        Command::FixedPower(args) => {
            let (cfg, metadata) = load(&args.common)?;
            let dropout = args.dropout.unwrap_or(cfg.design.dropout().value());
            let alpha = args.alpha.unwrap_or(cfg.design.alpha_total().value());
            let pi2 = Probability::new(args.pi2)
                .map_err(|_| config_error(format!("pi2 must lie in [0, 1], got {}", args.pi2)))?;
            let dropout = Probability::new(dropout)
                .map_err(|_| config_error(format!("dropout must lie in [0, 1], got {dropout}")))?;
            let alpha = Probability::new(alpha)
                .map_err(|_| config_error(format!("alpha must lie in [0, 1], got {alpha}")))?;
            let (reps, seed) = reps_seed(&args.common, &cfg);
            let power =
                fixed_design_power(args.n_total, pi2, args.effect, dropout, alpha, reps, seed)
                    .map_err(|e| numeric_error(e.to_string()))?;
            let result = FixedPowerResult {
                n_total: args.n_total,
                pi2: pi2.value(),
                effect: args.effect,
                dropout: dropout.value(),
                alpha: alpha.value(),
                power,
                mc_se: mc_standard_error(power, reps),
            };
            let bytes = render_fixed_power(&metadata, &result, format_of(&args.common, &cfg))
                .map_err(|e| numeric_error(e.to_string()))?;
            emit(&args.common, &cfg, bytes)
        }
    }
}

fn simulate(
    args: &CommonArgs,
    cfg: &RunConfig,
    metadata: RunMetadata,
) -> Result<Vec<u8>, CliError> {
    let (reps, seed) = reps_seed(args, cfg);
    let mut cells = Vec::new();
    for (threshold_label, d_s, d_c) in &cfg.threshold_sets {
        let design = rebuild_with_thresholds(&cfg.design, *d_s, *d_c)?;
        for (scenario_label, scenario) in &cfg.scenarios {
            let oc = run_simulation(&design, scenario, reps, seed)
                .map_err(|e| numeric_error(e.to_string()))?;
            cells.push(SimulationCell {
                scenario: scenario_label.clone(),
                thresholds: threshold_label.clone(),
                oc,
            });
        }
    }
    let bundle = ReportBundle::new(metadata).with_simulations(cells);
    render_simulation_report(&bundle, format_of(args, cfg)).map_err(|e| numeric_error(e.to_string()))
}

fn rebuild_with_thresholds(design: &DesignSpec, d_s: f64, d_c: f64) -> Result<DesignSpec, CliError> {
    let (w1, w2) = design.weights();
    DesignSpec::builder()
        .stage_sizes(design.n1(), design.n2())
        .alloc_ratio(design.alloc_ratio())
        .alpha_total(design.alpha_total().value())
        .alpha1(design.alpha1().value())
        .weights(w1, w2)
        .prevalence(design.prevalence().value())
        .dropout(design.dropout().value())
        .thresholds(d_s, d_c)
        .biomarker_sampling(design.biomarker_sampling())
        .build()
        .map_err(|e| config_error(format!("threshold set: {e}")))
}

fn load(args: &CommonArgs) -> Result<(RunConfig, RunMetadata), CliError> {
    let source = match &args.config {
        None => String::new(),
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?,
    };
    let cfg = parse_config(&source).map_err(|e| config_error(e.to_string()))?;
    let (reps, seed) = reps_seed(args, &cfg);
    let mut metadata = RunMetadata::new(&cfg.design, seed, reps);
    if args.stamp {
        let now = time::OffsetDateTime::now_utc()
            .format(&time::format_description::well_known::Rfc3339)
            .map_err(|e| config_error(format!("timestamp: {e}")))?;
        metadata = metadata.with_timestamp(now);
    }
    Ok((cfg, metadata))
}

fn reps_seed(args: &CommonArgs, cfg: &RunConfig) -> (u64, u64) {
    (args.reps.unwrap_or(cfg.n_reps).max(1), args.seed.unwrap_or(cfg.seed))
}

fn format_of(args: &CommonArgs, cfg: &RunConfig) -> OutputFormat {
    args.format.unwrap_or(cfg.format).into()
}

fn solve(design: &DesignSpec) -> Result<aed_core::BoundaryPair, CliError> {
    solve_boundaries(design.alpha_total(), design.alpha1(), design.information_fraction())
        .map_err(|e| numeric_error(e.to_string()))
}

fn emit(args: &CommonArgs, cfg: &RunConfig, bytes: Vec<u8>) -> Result<(), CliError> {
    let target = args.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from));
    match target {
        Some(path) => std::fs::write(&path, bytes)
            .map_err(|e| config_error(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| config_error(format!("stdout: {e}"))),
    }
}
