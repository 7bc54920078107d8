//! Argument definitions and subcommand dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tribell_core::mermin_bounds::top_two;
use tribell_core::oracle::SeeSawConfig;
use tribell_core::states::build;
use tribell_core::tensor_core::decompose;

use crate::error::CliError;
use crate::evaluate::{run, Context, OperatorChoice, DEFAULT_ANGLE_GRID};
use crate::output::{
    bound_csv, emit, scan_csv, to_json, verify_csv, BoundDocument, Format, OracleInfo, ReportRow, RunConfig,
    ScanDocument, StateInfo, VerifyDocument,
};
use crate::parse::{parse_angles, parse_biases, parse_criteria, parse_range, parse_state, parse_strengths, AngleMode};
use crate::scan::{scan, Axis, ScanSetup};
use crate::verify::{run_suite, Suite};

#[derive(Debug, Parser)]
#[command(name = "tribell", version, about = "Mermin and Svetlichny bounds for three-qubit states under general dichotomic measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate bounds and criteria for one configuration.
    Bound(RunArgs),
    /// Sweep one parameter and evaluate the bounds at each grid point.
    Scan(ScanArgs),
    /// Run seeded property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OperatorArg {
    Mermin,
    Svetlichny,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// ghz | gghz:<theta> | w | mix:<spec>:<v> | tstate:<9 or 27 floats> | random:<seed>
    #[arg(long)]
    pub state: String,
    /// rx,rxp,ry,ryp,rz,rzp
    #[arg(long, default_value = "1,1,1,1,1,1")]
    pub strengths: String,
    /// Six biases in the strength order; unbiased when absent.
    #[arg(long)]
    pub biases: Option<String>,
    /// theta_x,theta_y,theta_z in [0, pi], or `optimal`.
    #[arg(long, default_value = "optimal")]
    pub angles: String,
    #[arg(long, value_enum, default_value = "both")]
    pub operator: OperatorArg,
    /// Comma-separated criterion names, or `all-applicable`.
    #[arg(long, default_value = "all-applicable")]
    pub criteria: String,
    /// Attach a see-saw lower witness with this many restarts.
    #[arg(long)]
    pub oracle_restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per angle axis when maximizing over angles.
    #[arg(long, default_value_t = DEFAULT_ANGLE_GRID)]
    pub angle_grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// strength_all | visibility | angle_x
    #[arg(long)]
    pub axis: String,
    /// lo,hi,steps
    #[arg(long)]
    pub range: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// closed_form | tightness | brute_force_kl | invariance | all
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per suite.
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl From<OperatorArg> for OperatorChoice {
    fn from(o: OperatorArg) -> Self {
        match o {
            OperatorArg::Mermin => OperatorChoice::Mermin,
            OperatorArg::Svetlichny => OperatorChoice::Svetlichny,
            OperatorArg::Both => OperatorChoice::Both,
        }
    }
}

fn format(f: FormatArg) -> Format {
    match f {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    }
}

/// Validated form of [`RunArgs`].
struct Resolved {
    state: tribell_core::states::StateSpec,
    strengths: tribell_core::StrengthSextuple,
    biases: Option<[f64; 6]>,
    angles: AngleMode,
    criteria: Option<Vec<tribell_core::Criterion>>,
    oracle: Option<SeeSawConfig>,
    config: RunConfig,
}

fn resolve(a: &RunArgs) -> Result<Resolved, CliError> {
    let state = parse_state(&a.state)?;
    let strengths = parse_strengths(&a.strengths)?;
    let biases = a.biases.as_deref().map(|b| parse_biases(b, &strengths)).transpose()?;
    let angles = parse_angles(&a.angles)?;
    let criteria = parse_criteria(&a.criteria)?;
    if a.angle_grid < 2 {
        return Err(CliError::config("--angle-grid", "needs at least 2 points per axis"));
    }
    let oracle = match a.oracle_restarts {
        Some(0) => return Err(CliError::config("--oracle-restarts", "must be at least 1")),
        Some(restarts) => Some(SeeSawConfig { restarts, seed: a.seed, ..SeeSawConfig::default() }),
        None => None,
    };
    let operator: OperatorChoice = a.operator.into();
    let config = RunConfig {
        operator: operator.name().to_string(),
        strengths: strengths.as_array(),
        biases,
        angles: match angles {
            AngleMode::Fixed(t) => Some(t),
            AngleMode::Optimal => None,
        },
        angle_grid: a.angle_grid,
        criteria: criteria.as_ref().map(|cs| cs.iter().map(|c| c.name().to_string()).collect()),
        oracle: oracle.map(|o| OracleInfo { restarts: o.restarts, seed: o.seed }),
    };
    Ok(Resolved { state, strengths, biases, angles, criteria, oracle, config })
}

pub fn cmd_bound(a: &RunArgs) -> Result<BoundDocument, CliError> {
    let r = resolve(a)?;
    let rho = build(&r.state).map_err(|e| CliError::config("--state", e.to_string()))?;
    let ctx = Context::new(decompose(&rho), r.strengths, r.biases, r.angles, a.angle_grid);
    let reports = run(&ctx, a.operator.into(), r.criteria.as_deref(), r.oracle.as_ref())?;
    let (s1, s2) = top_two(&ctx.t);
    Ok(BoundDocument {
        state: StateInfo { spec: a.state.trim().to_string(), tstate: ctx.tstate, singular_values: [s1, s2] },
        config: r.config,
        reports: reports.iter().map(ReportRow::from).collect(),
    })
}

pub fn cmd_scan(a: &ScanArgs) -> Result<ScanDocument, CliError> {
    let r = resolve(&a.run)?;
    let axis = Axis::from_name(a.axis.trim())
        .ok_or_else(|| CliError::config("--axis", format!("unknown axis `{}`", a.axis)))?;
    let (lo, hi, steps) = parse_range(&a.range)?;
    let setup = ScanSetup {
        state: r.state,
        strengths: r.strengths,
        biases: r.biases,
        angles: r.angles,
        angle_grid: a.run.angle_grid,
        operators: a.run.operator.into(),
        criteria: r.criteria,
        oracle: r.oracle,
    };
    let rows = scan(&setup, axis, lo, hi, steps)?;
    Ok(ScanDocument {
        axis: axis.name().to_string(),
        range: [lo, hi],
        steps,
        state: a.run.state.trim().to_string(),
        config: r.config,
        rows,
    })
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<VerifyDocument, CliError> {
    let suites = match a.suite.trim() {
        "all" => Suite::ALL.to_vec(),
        name => vec![Suite::from_name(name)
            .ok_or_else(|| CliError::config("--suite", format!("unknown suite `{name}`")))?],
    };
    if a.budget == 0 {
        return Err(CliError::config("--budget", "must be at least 1"));
    }
    let suites: Vec<_> = suites.into_iter().map(|s| run_suite(s, a.seed, a.budget)).collect();
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyDocument { seed: a.seed, budget: a.budget, suites, passed })
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bound(a) => {
            let doc = cmd_bound(&a)?;
            let text = match format(a.output.format) {
                Format::Json => to_json(&doc),
                Format::Csv => bound_csv(&doc)?,
            };
            emit(&text, a.output.out.as_deref())
        }
        Command::Scan(a) => {
            let doc = cmd_scan(&a)?;
            let text = match format(a.run.output.format) {
                Format::Json => to_json(&doc),
                Format::Csv => scan_csv(&doc)?,
            };
            emit(&text, a.run.output.out.as_deref())
        }
        Command::Verify(a) => {
            let doc = cmd_verify(&a)?;
            let text = match format(a.output.format) {
                Format::Json => to_json(&doc),
                Format::Csv => verify_csv(&doc)?,
            };
            emit(&text, a.output.out.as_deref())?;
            match doc.suites.iter().find(|s| !s.passed) {
                Some(s) => Err(CliError::PropertyFailure(format!(
                    "{}: max deviation {:e} exceeds {:e}",
                    s.suite, s.max_deviation, s.tolerance
                ))),
                None => Ok(()),
            }
        }
    }
}
