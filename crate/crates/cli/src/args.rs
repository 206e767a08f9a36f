use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lvim::lvim::JacobianMode;
use lvim::problems::LoadType;

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "lvim", version, about = "Local variational iteration benchmarks")]
pub struct Cli {
    /// Print the default solver settings of every problem and exit.
    #[arg(long, global = true)]
    pub print_defaults: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem with LVIM.
    Run(ProblemArgs),
    /// Solve with LVIM and the Dormand-Prince reference and report their agreement.
    Compare(CompareArgs),
    /// Check the collocation operators for each basis size.
    OpsCheck(OpsCheckArgs),
    /// Tabulate a family of solutions.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Number of Chebyshev basis functions (and nodes) per segment.
    #[arg(long)]
    pub n: Option<usize>,
    /// Segment length.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Convergence tolerance on the correction.
    #[arg(long)]
    pub tol: Option<f64>,
    /// End of the integration span.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_parser = parse_jacobian)]
    pub jacobian: Option<JacobianMode>,
    /// Relative tolerance of the reference integrator.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance of the reference integrator.
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Mathieu `delta`.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Mathieu `epsilon`.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Pendulum `g/l`.
    #[arg(long, default_value_t = 1.0)]
    pub g_over_l: f64,
    /// White dwarf `C`, or elastica `c`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Elastica `a`.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Fraction of the elastica half-width `c` left out at the end.
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    /// Series start of the isothermal sphere.
    #[arg(long, default_value_t = 1e-3)]
    pub xi_start: f64,
    /// Series start of the white dwarf.
    #[arg(long, default_value_t = 1e-3)]
    pub eta_start: f64,
    /// Blasius truncation length.
    #[arg(long, default_value_t = lvim::problems::BLASIUS_XI_MAX)]
    pub xi_max: f64,
    /// Buckled bar load `P`.
    #[arg(long, default_value_t = 50.0)]
    pub load: f64,
    #[arg(long, default_value_t = LoadType::Dead, value_parser = parse_load_type)]
    pub load_type: LoadType,
    /// Two initial slopes for the shooting iteration, e.g. `12.5,13`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub guesses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// One of blasius, emden, white-dwarf, mathieu, pendulum, buckled-bar, elastica, leo.
    pub problem: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Gravity coefficient file for `leo` (defaults to the bundled degree-8 field).
    #[arg(long)]
    pub gravity_file: Option<PathBuf>,
    /// Truncation degree of the gravity field.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Exit with status 3 when any max discrepancy is not below this value.
    #[arg(long)]
    pub assert_below: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OpsCheckArgs {
    /// Basis sizes to check.
    #[arg(default_values_t = vec![5usize, 7, 13, 26])]
    pub n: Vec<usize>,
    /// Segment lengths to check.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 1.0, 500.0])]
    pub dt: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    PendulumFrequency,
    ElasticaRegimes,
    BarLoad,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    /// Pendulum amplitudes; overrides `--from/--to/--count`.
    #[arg(long, value_delimiter = ',')]
    pub amplitudes: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.1)]
    pub from: f64,
    #[arg(long, default_value_t = 3.1)]
    pub to: f64,
    #[arg(long, default_value_t = 31)]
    pub count: usize,
    /// Elastica `(a, c)` pairs written `a:c`.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub cases: Option<Vec<(f64, f64)>>,
    /// Buckled bar loads.
    #[arg(long, value_delimiter = ',', default_values_t = vec![25.0, 50.0])]
    pub loads: Vec<f64>,
    #[arg(long, default_value_t = LoadType::Dead, value_parser = parse_load_type)]
    pub load_type: LoadType,
    /// Directory for one CSV file per curve.
    #[arg(long)]
    pub curve_dir: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_jacobian(s: &str) -> Result<JacobianMode, String> {
    s.parse().map_err(|e: lvim::Error| e.to_string())
}

fn parse_load_type(s: &str) -> Result<LoadType, String> {
    s.parse().map_err(|e: lvim::Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, c) = s.split_once(':').ok_or_else(|| format!("expected a:c, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let c = c.trim().parse().map_err(|e| format!("{c:?}: {e}"))?;
    Ok((a, c))
}
