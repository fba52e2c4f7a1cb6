//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 I/O failure.
//! The default tolerance can be overridden with `SVS_PHASE_TOL`; an explicit
//! `--tol` flag takes precedence.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::coherent::{self, CoherentEnsemble};
use crate::error::PhaseError;
use crate::fisher::{self, PhaseDensity};
use crate::output::{format_sig, Cell, Format, Table};
use crate::planner::{self, SplitOptions};
use crate::precision::{Method, PrecisionResult};
use crate::quadrature::QuadConfig;
use crate::simulate::{self, Estimator, TrialConfig};
use crate::special_fn::EvalConfig;
use crate::svs::{self, SqueezedEnsemble};

pub const TOL_ENV: &str = "SVS_PHASE_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "svs-phase", version, about = "Phase estimation bounds for squeezed vacuum and coherent states")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Svs,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Series,
    Integral,
    Asymptotic,
    #[value(name = "large-N", alias = "large-n")]
    LargeN,
    SmallSqueezing,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Series => Method::Series,
            MethodArg::Integral => Method::Integral,
            MethodArg::Asymptotic => Method::Asymptotic,
            MethodArg::LargeN => Method::LargeN,
            MethodArg::SmallSqueezing => Method::SmallSqueezing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactMethodArg {
    Series,
    Integral,
}

impl From<ExactMethodArg> for Method {
    fn from(m: ExactMethodArg) -> Self {
        match m {
            ExactMethodArg::Series => Method::Series,
            ExactMethodArg::Integral => Method::Integral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FisherMethodArg {
    Numeric,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    #[value(alias = "cm")]
    CircularMean,
    #[value(alias = "max-likelihood")]
    Ml,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::CircularMean => Estimator::CircularMean,
            EstimatorArg::Ml => Estimator::MaxLikelihood,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity and Holevo variance of N copies.
    Fidelity(FidelityArgs),
    /// Scaled variance NV against the photon number per copy.
    ScanN(ScanNArgs),
    /// Rescaled variance E²V against the total energy.
    ScanEnergy(ScanEnergyArgs),
    /// Fisher information of the canonical phase measurement.
    Fisher(FisherArgs),
    /// Best number of copies for a fixed photon budget.
    Split(SplitArgs),
    /// Monte Carlo of repeated individual measurements.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long, value_enum, default_value_t = StateArg::Svs)]
    pub state: StateArg,
    /// Mean photon number per copy.
    #[arg(long)]
    pub n: f64,
    #[arg(long, default_value_t = 1)]
    pub copies: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Series)]
    pub method: MethodArg,
    /// Relative tolerance of series and quadrature.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScanNArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4, 5, 6])]
    pub copies_list: Vec<u32>,
    #[arg(long, default_value_t = 1e-3)]
    pub n_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub n_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Logarithmic (true) or linear (false) grid.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub log: bool,
    #[arg(long, value_enum, default_value_t = ExactMethodArg::Series)]
    pub method: ExactMethodArg,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanEnergyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12])]
    pub copies_list: Vec<u32>,
    #[arg(long = "E-min", alias = "e-min", default_value_t = 1e-2)]
    pub e_min: f64,
    #[arg(long = "E-max", alias = "e-max", default_value_t = 1e4)]
    pub e_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = ExactMethodArg::Series)]
    pub method: ExactMethodArg,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[arg(long, conflicts_with = "n", required_unless_present = "n")]
    pub beta: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long, value_enum, default_value_t = FisherMethodArg::Numeric)]
    pub method: FisherMethodArg,
    /// Also report Cramér-Rao bounds for this many copies.
    #[arg(long)]
    pub copies: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub energy: f64,
    #[arg(long, default_value_t = planner::DEFAULT_MAX_COPIES)]
    pub max_copies: u32,
    #[arg(long, value_enum, default_value_t = ExactMethodArg::Integral)]
    pub method: ExactMethodArg,
    /// Relative variance gap treated as a tie (smallest N wins).
    #[arg(long, default_value_t = planner::DEFAULT_TIE_REL_TOL)]
    pub tie_tol: f64,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write the full scan here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: f64,
    #[arg(long)]
    pub copies: u32,
    #[arg(long, default_value_t = 500)]
    pub trials: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Ml)]
    pub estimator: EstimatorArg,
    /// True phase in [0, π).
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(PhaseError),
    Io(io::Error),
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::InvalidConfig(msg) => CliError::Usage(msg),
            PhaseError::Domain { .. } => CliError::Usage(e.to_string()),
            e => CliError::Numeric(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command,
/// writing results to stdout and diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Numeric(e)) => {
            let _ = writeln!(err, "numeric failure: {e}");
            EXIT_NUMERIC
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "i/o failure: {e}");
            EXIT_IO
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let format = Format::from(cli.format);
    let table = match &cli.command {
        Command::Fidelity(a) => cmd_fidelity(a)?,
        Command::ScanN(a) => {
            let t = cmd_scan_n(a)?;
            return emit(&t, format, a.out.as_ref(), out);
        }
        Command::ScanEnergy(a) => {
            let t = cmd_scan_energy(a)?;
            return emit(&t, format, a.out.as_ref(), out);
        }
        Command::Fisher(a) => cmd_fisher(a)?,
        Command::Split(a) => {
            let (summary, scan) = cmd_split(a)?;
            if let Some(path) = &a.out {
                write_file(&scan, format, path)?;
            }
            summary
        }
        Command::Simulate(a) => cmd_simulate(a)?,
    };
    table.write(format, &mut *out)?;
    Ok(())
}

fn emit(t: &Table, format: Format, path: Option<&PathBuf>, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(t, format, p),
        None => Ok(t.write(format, out)?),
    }
}

fn write_file(t: &Table, format: Format, path: &PathBuf) -> CliResult<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    t.write(format, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Flag, then environment, then the library default.
fn resolve_tol(flag: Option<f64>) -> CliResult<Option<f64>> {
    let tol = match flag {
        Some(t) => Some(t),
        None => match std::env::var(TOL_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("{TOL_ENV}={s:?} is not a number")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!("tolerance must lie in (0, 1), got {t}")));
        }
    }
    Ok(tol)
}

fn eval_config(tol: Option<f64>) -> CliResult<EvalConfig> {
    match tol {
        Some(t) => Ok(EvalConfig::new(t, EvalConfig::default().max_terms)?),
        None => Ok(EvalConfig::default()),
    }
}

fn quad_config(tol: Option<f64>) -> QuadConfig {
    match tol {
        Some(t) => QuadConfig::with_tolerances(t, QuadConfig::default().abs_tol),
        None => QuadConfig::default(),
    }
}

fn version_meta(t: &mut Table, command: &str) {
    t.meta("svs-phase", env!("CARGO_PKG_VERSION")).meta("command", command);
}

fn svs_eval(e: &SqueezedEnsemble, method: Method, tol: Option<f64>) -> CliResult<PrecisionResult> {
    let cfg = eval_config(tol)?;
    match method {
        Method::Integral if e.beta() > 0.0 => Ok(svs::fidelity_integral_with(e, &quad_config(tol))?),
        m => Ok(svs::evaluate(e, m, &cfg)?),
    }
}

fn cmd_fidelity(a: &FidelityArgs) -> CliResult<Table> {
    let tol = resolve_tol(a.tol)?;
    let method = Method::from(a.method);
    let r = match a.state {
        StateArg::Svs => svs_eval(&SqueezedEnsemble::from_photons(a.n, a.copies)?, method, tol)?,
        StateArg::Coherent => {
            let e = CoherentEnsemble::new(a.n, a.copies)?;
            match method {
                Method::Series => coherent::fidelity_series(&e, &eval_config(tol)?)?,
                Method::Integral => coherent::fidelity_integral_with(&e, &quad_config(tol))?,
                Method::Asymptotic => coherent::fidelity_asymptotic(&e)?,
                m => {
                    return Err(CliError::Usage(format!("method {m} is not available for coherent states")));
                }
            }
        }
    };
    let mut t = Table::new([
        "state",
        "n",
        "N",
        "method",
        "F",
        "one_minus_F",
        "V",
        "stat_variance",
        "err_est",
        "advisory",
    ]);
    version_meta(&mut t, "fidelity");
    if let Some(tol) = tol {
        t.meta("tol", format_sig(tol));
    }
    let state = match a.state {
        StateArg::Svs => "svs",
        StateArg::Coherent => "coherent",
    };
    t.push(vec![
        state.into(),
        a.n.into(),
        a.copies.into(),
        r.method.as_str().into(),
        r.fidelity.into(),
        r.infidelity.into(),
        r.holevo_variance.into(),
        r.stat_variance.into(),
        r.err_est.into(),
        r.advisory.map(|a| a.to_string()).unwrap_or_default().into(),
    ]);
    Ok(t)
}

fn grid(min: f64, max: f64, points: usize, log: bool) -> CliResult<Vec<f64>> {
    if points == 0 {
        return Err(CliError::Usage("points must be >= 1".into()));
    }
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(CliError::Usage(format!("invalid grid bounds [{min}, {max}]")));
    }
    if log && min <= 0.0 {
        return Err(CliError::Usage("logarithmic grid needs a positive lower bound".into()));
    }
    if min < 0.0 {
        return Err(CliError::Usage("grid values must be >= 0".into()));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / step;
            if i == 0 {
                min
            } else if i + 1 == points {
                max
            } else if log {
                (min.ln() + t * (max.ln() - min.ln())).exp()
            } else {
                min + t * (max - min)
            }
        })
        .collect())
}

fn check_copies(list: &[u32]) -> CliResult<()> {
    if list.is_empty() || list.contains(&0) {
        return Err(CliError::Usage("copies list must be non-empty with entries >= 1".into()));
    }
    Ok(())
}

fn cmd_scan_n(a: &ScanNArgs) -> CliResult<Table> {
    check_copies(&a.copies_list)?;
    let tol = resolve_tol(a.tol)?;
    let ns = grid(a.n_min, a.n_max, a.points, a.log)?;
    let method = Method::from(a.method);
    let mut copies = a.copies_list.clone();
    copies.sort_unstable();
    copies.dedup();
    let pairs: Vec<(u32, f64)> = copies.iter().flat_map(|&c| ns.iter().map(move |&n| (c, n))).collect();
    let results: Vec<(u32, f64, PrecisionResult)> = pairs
        .par_iter()
        .map(|&(c, n)| {
            let e = SqueezedEnsemble::from_photons(n, c)?;
            svs_eval(&e, method, tol).map(|r| (c, n, r)).map_err(|err| match err {
                CliError::Numeric(source) => CliError::Numeric(PhaseError::ScanPoint {
                    copies: c,
                    n,
                    source: Box::new(source),
                }),
                other => other,
            })
        })
        .collect::<CliResult<_>>()?;

    let mut t = Table::new(["N", "n", "F", "V", "NV", "NV_limit", "method"]);
    version_meta(&mut t, "scan-n");
    t.meta("method", method)
        .meta("grid", if a.log { "log" } else { "linear" })
        .meta("NV_limit", "N*2*(1-F_HL) with 1-F_HL = 1/(4n(n+1)N), i.e. 1/(2n(n+1))");
    if let Some(tol) = tol {
        t.meta("tol", format_sig(tol));
    }
    for (c, n, r) in results {
        let limit = if n > 0.0 { 1.0 / (2.0 * n * (n + 1.0)) } else { f64::INFINITY };
        t.push(vec![
            c.into(),
            n.into(),
            r.fidelity.into(),
            r.holevo_variance.into(),
            (c as f64 * r.holevo_variance).into(),
            limit.into(),
            r.method.as_str().into(),
        ]);
    }
    Ok(t)
}

fn cmd_scan_energy(a: &ScanEnergyArgs) -> CliResult<Table> {
    check_copies(&a.copies_list)?;
    let tol = resolve_tol(a.tol)?;
    let es = grid(a.e_min, a.e_max, a.points, true)?;
    let method = Method::from(a.method);
    let mut copies = a.copies_list.clone();
    copies.sort_unstable();
    copies.dedup();
    let pairs: Vec<(u32, f64)> = copies.iter().flat_map(|&c| es.iter().map(move |&e| (c, e))).collect();
    let rows: Vec<(u32, f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(c, energy)| {
            let n = energy / c as f64;
            let e = SqueezedEnsemble::from_photons(n, c)?;
            let r = svs_eval(&e, method, tol)?;
            Ok((c, energy, n, r.holevo_variance))
        })
        .collect::<CliResult<_>>()?;
    let mut t = Table::new(["N", "E", "n", "V", "E2V"]);
    version_meta(&mut t, "scan-energy");
    t.meta("method", method);
    if let Some(tol) = tol {
        t.meta("tol", format_sig(tol));
    }
    for (c, energy, n, v) in rows {
        t.push(vec![c.into(), energy.into(), n.into(), v.into(), (energy * energy * v).into()]);
    }
    Ok(t)
}

fn cmd_fisher(a: &FisherArgs) -> CliResult<Table> {
    let beta = match (a.beta, a.n) {
        (Some(b), _) => b,
        (None, Some(n)) => {
            if !(n.is_finite() && n >= 0.0) {
                return Err(CliError::Usage(format!("n must be finite and >= 0, got {n}")));
            }
            fisher::beta_from_photons(n)
        }
        (None, None) => return Err(CliError::Usage("one of --beta or --n is required".into())),
    };
    if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
        return Err(CliError::Usage(format!("beta must lie in [0, 1), got {beta}")));
    }
    let n = a.n.unwrap_or_else(|| fisher::photons_from_beta(beta));
    let (info, pd) = match a.method {
        FisherMethodArg::Numeric => {
            let pd = PhaseDensity::new(beta)?;
            (fisher::fisher_numeric(&pd)?, Some(pd))
        }
        FisherMethodArg::Asymptotic => (fisher::fisher_asymptotic(beta)?, None),
    };
    let mut columns = vec!["beta", "n", "I", "method", "err_est"];
    let mut row: Vec<Cell> = vec![
        beta.into(),
        n.into(),
        info.info.into(),
        info.method.as_str().into(),
        info.err_est.into(),
    ];
    if let Some(copies) = a.copies {
        if copies == 0 {
            return Err(CliError::Usage("copies must be >= 1".into()));
        }
        let bound = if n > 0.0 { fisher::cramer_rao(n, copies)? } else { f64::INFINITY };
        let exact = match pd {
            Some(_) if info.info > 0.0 => 1.0 / (copies as f64 * info.info),
            Some(_) => f64::INFINITY,
            None => bound,
        };
        columns.extend(["N", "cramer_rao", "cramer_rao_exact"]);
        row.extend([copies.into(), bound.into(), exact.into()]);
    }
    let mut t = Table::new(columns);
    version_meta(&mut t, "fisher");
    t.push(row);
    Ok(t)
}

fn cmd_split(a: &SplitArgs) -> CliResult<(Table, Table)> {
    let tol = resolve_tol(a.tol)?;
    let opts = SplitOptions {
        method: a.method.into(),
        tie_rel_tol: a.tie_tol,
        eval: eval_config(tol)?,
    };
    let plan = planner::optimal_split_with(a.energy, a.max_copies, &opts)?;
    let mut summary = Table::new(["E", "optimal_N", "n", "V", "E2V", "method"]);
    version_meta(&mut summary, "split");
    summary.meta("max_copies", a.max_copies).meta("tie_tol", format_sig(a.tie_tol));
    summary.push(vec![
        plan.energy.into(),
        plan.optimal_copies.into(),
        plan.per_copy_n.into(),
        plan.variance_at_optimum.into(),
        (plan.energy * plan.energy * plan.variance_at_optimum).into(),
        plan.method.as_str().into(),
    ]);
    let mut scan = Table::new(["N", "n", "F", "V", "E2V"]);
    version_meta(&mut scan, "split");
    scan.meta("E", format_sig(plan.energy)).meta("method", plan.method);
    for r in &plan.scan {
        scan.push(vec![
            r.copies.into(),
            r.n.into(),
            r.fidelity.into(),
            r.holevo_variance.into(),
            r.rescaled.into(),
        ]);
    }
    Ok((summary, scan))
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<Table> {
    if !(0.0..PI).contains(&a.theta) {
        return Err(CliError::Usage(format!("theta must lie in [0, pi), got {}", a.theta)));
    }
    let tc = TrialConfig {
        n: a.n,
        copies: a.copies,
        trials: a.trials,
        seed: a.seed,
        estimator: a.estimator.into(),
        theta_true: a.theta,
    };
    let r = simulate::run_trials(&tc)?;
    let mut t = Table::new([
        "n",
        "N",
        "trials",
        "estimator",
        "theta",
        "F_hat",
        "V_hat",
        "stat_variance",
        "scaled_variance",
        "mse",
        "im_residual",
        "re_residual",
        "ci_halfwidth",
        "ml_fallbacks",
    ]);
    version_meta(&mut t, "simulate");
    t.meta("seed", a.seed);
    let scale = a.n * a.n * a.copies as f64;
    t.push(vec![
        a.n.into(),
        a.copies.into(),
        a.trials.into(),
        tc.estimator.as_str().into(),
        a.theta.into(),
        r.empirical_fidelity.into(),
        r.empirical_holevo_variance.into(),
        r.stat_variance.into(),
        (r.stat_variance * scale).into(),
        r.mean_sq_error.into(),
        r.im_residual.into(),
        r.re_residual.into(),
        r.ci_halfwidth.into(),
        r.ml_fallbacks.into(),
    ]);
    Ok(t)
}
