//! Command-line front end for the `wiretap` binary.
//!
//! Exit codes: 0 on success, 1 on a domain or numerical failure (including a
//! violated turbulence chain), 2 on a usage error or an unparseable input file.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::allocation::{allocate, BoundKind, DEFAULT_TOL};
use crate::entropy::{
    asymptotic_coefficients, capacity_infinite, lower_bound_single, photon_efficiency, upper_bound_single,
    PhotonBudget, Transmissivity, Unit,
};
use crate::error::Error;
use crate::figure::{run_figure, FigureKind, FigureRequest, Scale};
use crate::haar::haar_unitary;
use crate::matrix::ComplexMatrix;
use crate::modes::{mode_decompose, ModeSpectrum, UnitaryTransition};
use crate::turbulence::{analyze, Basis, EnsembleSpec, TurbulenceReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wiretap", version, about = "Private-capacity bounds for bosonic wiretap channels")]
pub struct Cli {
    /// Emit JSON instead of aligned text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for random matrices; overrides the seed in an ensemble file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Unit::Bits)]
    pub unit: Unit,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-mode bounds L and U, photon efficiencies and asymptotic coefficients.
    #[command(allow_negative_numbers = true)]
    Bounds {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        nbar: f64,
    },
    /// Write photon-efficiency curve data as CSV.
    #[command(allow_negative_numbers = true)]
    Figure(FigureArgs),
    /// Reduce a unitary transition matrix to parallel single-mode channels.
    #[command(allow_negative_numbers = true)]
    Decompose(DecomposeArgs),
    /// Optimal photon allocation across modes.
    #[command(allow_negative_numbers = true)]
    Allocate(AllocateArgs),
    /// Monte Carlo and second-moment bounds for a random channel ensemble.
    #[command(allow_negative_numbers = true)]
    Turbulence(TurbulenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureChoice {
    /// Photon efficiency against nbar at fixed eta.
    Nbar,
    /// Photon efficiency against eta at fixed nbar.
    Eta,
    /// Photon efficiency against spectral efficiency for identical modes.
    Spectral,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, value_enum)]
    pub kind: FigureChoice,
    /// Output CSV path.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub nbar: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub scale: Option<Scale>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Unitary matrix as JSON (`rows`, `cols`, `re`, `im`) or CSV.
    #[arg(long, conflicts_with = "haar", required_unless_present = "haar")]
    pub matrix: Option<PathBuf>,
    /// Use an `N x N` Haar unitary instead of a file.
    #[arg(long)]
    pub haar: Option<usize>,
    /// Alice's input modes.
    #[arg(long)]
    pub m: usize,
    /// Bob's output modes.
    #[arg(long)]
    pub k: usize,
    /// Eve's output modes; defaults to `N - k`.
    #[arg(long)]
    pub l: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    /// Comma-separated transmissivities, or a path to a JSON array.
    #[arg(long)]
    pub etas: String,
    #[arg(long)]
    pub nbar: f64,
    #[arg(long, value_enum, default_value_t = BoundKind::Lower)]
    pub kind: BoundKind,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct TurbulenceArgs {
    /// Ensemble JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub nbar: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Basis used for the reported second-moment bound.
    #[arg(long, value_enum, default_value_t = Basis::Eigen)]
    pub basis: Basis,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("lower-bound chain violated: {0}")]
    ChainViolated(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::ChainViolated(_) => EXIT_FAILURE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Bounds { eta, nbar } => run_bounds(cli, *eta, *nbar, out),
        Command::Figure(args) => run_figure_cmd(cli, args, out),
        Command::Decompose(args) => run_decompose(cli, args, out),
        Command::Allocate(args) => run_allocate(cli, args, out),
        Command::Turbulence(args) => run_turbulence(cli, args, out),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(Error::from)?;
    Ok(())
}

fn emit_json(out: &mut dyn Write, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    write_out(out, &format!("{text}\n"))
}

fn emit_table(out: &mut dyn Write, rows: &[(&str, String)]) -> CliResult<()> {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut text = String::new();
    for (k, v) in rows {
        text.push_str(&format!("{k:<width$}  {v}\n"));
    }
    write_out(out, &text)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.12e}"))
}

fn run_bounds(cli: &Cli, eta: f64, nbar: f64, out: &mut dyn Write) -> CliResult<()> {
    let unit = cli.unit;
    let eta_t = Transmissivity::new(eta)?;
    let nbar_t = PhotonBudget::new(nbar)?;
    let lower = lower_bound_single(eta_t, nbar_t);
    let upper = upper_bound_single(eta_t, nbar_t);
    let (lower_pe, upper_pe) = if nbar > 0.0 {
        (
            Some(photon_efficiency(lower, nbar_t, unit)?),
            Some(photon_efficiency(upper, nbar_t, unit)?),
        )
    } else {
        (None, None)
    };
    let coeffs = asymptotic_coefficients(eta_t).ok();
    let cap = unit.from_nats(capacity_infinite(eta_t));
    let asym_lower = coeffs.map(|c| unit.from_nats(c.lower));
    let asym_upper = coeffs.map(|c| unit.from_nats(c.upper));
    let leading = (2.0 * eta - 1.0).max(0.0);

    if cli.json {
        emit_json(
            out,
            &json!({
                "units": unit.as_str(),
                "eta": eta,
                "nbar": nbar,
                "lower": lower.in_unit(unit),
                "upper": upper.in_unit(unit),
                "lower_per_photon": lower_pe,
                "upper_per_photon": upper_pe,
                "capacity_infinite": if cap.is_finite() { json!(cap) } else { json!("inf") },
                "leading_coefficient": leading,
                "asymptotic_lower": asym_lower,
                "asymptotic_upper": asym_upper,
            }),
        )
    } else {
        emit_table(
            out,
            &[
                ("units", unit.as_str().to_string()),
                ("eta", format!("{eta}")),
                ("nbar", format!("{nbar}")),
                ("lower", format!("{:.12e}", lower.in_unit(unit))),
                ("upper", format!("{:.12e}", upper.in_unit(unit))),
                ("lower_per_photon", fmt_opt(lower_pe)),
                ("upper_per_photon", fmt_opt(upper_pe)),
                ("capacity_infinite", if cap.is_finite() { format!("{cap:.12e}") } else { "inf".into() }),
                ("leading_coefficient", format!("{leading}")),
                ("asymptotic_lower", fmt_opt(asym_lower)),
                ("asymptotic_upper", fmt_opt(asym_upper)),
            ],
        )
    }
}

fn figure_request(args: &FigureArgs) -> CliResult<FigureRequest> {
    let mut req = match args.kind {
        FigureChoice::Nbar => {
            let mut r = FigureRequest::nbar_sweep();
            if let (Some(eta), FigureKind::PhotonEffVsNbar { eta: e }) = (args.eta, &mut r.kind) {
                *e = eta;
            }
            r
        }
        FigureChoice::Eta => {
            let mut r = FigureRequest::eta_sweep();
            if let (Some(nbar), FigureKind::PhotonEffVsEta { nbar: n }) = (args.nbar, &mut r.kind) {
                *n = nbar;
            }
            r
        }
        FigureChoice::Spectral => {
            let mut r = FigureRequest::spectral_sweep();
            if let FigureKind::PhotonEffVsSpectralEff { modes, eta } = &mut r.kind {
                if let Some(m) = args.modes {
                    *modes = m;
                }
                if let Some(e) = args.eta {
                    *eta = e;
                }
            }
            r
        }
    };
    let unused = match args.kind {
        FigureChoice::Nbar => [("--nbar", args.nbar.is_some()), ("--modes", args.modes.is_some())],
        FigureChoice::Eta => [("--eta", args.eta.is_some()), ("--modes", args.modes.is_some())],
        FigureChoice::Spectral => [("--nbar", args.nbar.is_some()), ("--modes", false)],
    };
    if let Some((flag, _)) = unused.iter().find(|(_, set)| *set) {
        return Err(CliError::Usage(format!("{flag} does not apply to this figure")));
    }
    let g = &mut req.grid;
    g.start = args.start.unwrap_or(g.start);
    g.stop = args.stop.unwrap_or(g.stop);
    g.points = args.points.unwrap_or(g.points);
    g.scale = args.scale.unwrap_or(g.scale);
    Ok(req)
}

fn run_figure_cmd(cli: &Cli, args: &FigureArgs, out: &mut dyn Write) -> CliResult<()> {
    let req = figure_request(args)?;
    let table = run_figure(&req)?;
    table.write_csv(&args.output)?;
    if let Some(script) = &args.gnuplot {
        let text = table.gnuplot_script(&args.output.to_string_lossy(), req.grid.scale == Scale::Log);
        std::fs::write(script, text).map_err(Error::from)?;
    }
    if cli.json {
        emit_json(
            out,
            &json!({
                "units": "bits",
                "request": req,
                "output": args.output,
                "rows": table.rows.len(),
                "columns": table.columns,
            }),
        )
    } else {
        emit_table(
            out,
            &[
                ("output", args.output.display().to_string()),
                ("rows", table.rows.len().to_string()),
                ("columns", table.columns.join(",")),
            ],
        )
    }
}

fn run_decompose(cli: &Cli, args: &DecomposeArgs, out: &mut dyn Write) -> CliResult<()> {
    let t = match (&args.matrix, args.haar) {
        (Some(path), _) => ComplexMatrix::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        (None, Some(n)) => {
            if n == 0 {
                return Err(CliError::Usage("--haar needs N >= 1".into()));
            }
            haar_unitary(n, cli.seed.unwrap_or(0))
        }
        (None, None) => return Err(CliError::Usage("one of --matrix or --haar is required".into())),
    };
    let l = match args.l {
        Some(l) => l,
        None => t.rows().checked_sub(args.k).ok_or_else(|| {
            CliError::Usage(format!("k = {} exceeds the matrix size {}", args.k, t.rows()))
        })?,
    };
    let transition = UnitaryTransition::new(t, args.m, args.k, l)?;
    let d = mode_decompose(&transition)?;
    if cli.json {
        emit_json(
            out,
            &json!({
                "units": "transmissivity",
                "m": args.m,
                "k": args.k,
                "l": l,
                "etas": d.spectrum.etas(),
                "partition_residual": d.partition_residual,
            }),
        )
    } else {
        let etas: Vec<String> = d.spectrum.etas().iter().map(|e| format!("{e:.15}")).collect();
        emit_table(
            out,
            &[
                ("dims", format!("m = {}, k = {}, l = {l}", args.m, args.k)),
                ("etas", etas.join(", ")),
                ("partition_residual", format!("{:.3e}", d.partition_residual)),
            ],
        )
    }
}

fn parse_etas(arg: &str) -> CliResult<Vec<f64>> {
    let path = std::path::Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{arg}: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{arg}: expected a JSON array of numbers: {e}")));
    }
    let trimmed = arg.trim();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed).map_err(|e| CliError::Usage(format!("--etas: {e}")));
    }
    trimmed
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("--etas: cannot parse {s:?}: {e}")))
        })
        .collect()
}

fn run_allocate(cli: &Cli, args: &AllocateArgs, out: &mut dyn Write) -> CliResult<()> {
    let unit = cli.unit;
    let spectrum = ModeSpectrum::new(parse_etas(&args.etas)?)?;
    let nbar = PhotonBudget::new(args.nbar)?;
    let a = allocate(&spectrum, nbar, args.kind, args.tol)?;
    if cli.json {
        emit_json(
            out,
            &json!({
                "units": unit.as_str(),
                "kind": args.kind,
                "nbar": args.nbar,
                "etas": spectrum.etas(),
                "budgets": a.budgets,
                "value": a.value.in_unit(unit),
                "lagrange_multiplier": unit.from_nats(a.lagrange_multiplier),
            }),
        )
    } else {
        let budgets: Vec<String> = a.budgets.iter().map(|b| format!("{b:.12e}")).collect();
        let etas: Vec<String> = spectrum.etas().iter().map(|e| e.to_string()).collect();
        emit_table(
            out,
            &[
                ("units", unit.as_str().to_string()),
                ("etas", etas.join(", ")),
                ("budgets", budgets.join(", ")),
                ("value", format!("{:.12e}", a.value.in_unit(unit))),
                ("lagrange_multiplier", format!("{:.12e}", unit.from_nats(a.lagrange_multiplier))),
            ],
        )
    }
}

/// Rescale every rate in the report from nats to `unit`.
fn report_in_unit(mut r: TurbulenceReport, unit: Unit) -> TurbulenceReport {
    let f = |x: f64| unit.from_nats(x);
    r.units = unit.as_str();
    r.mean = f(r.mean);
    r.std_error = f(r.std_error);
    r.confidence_95 = (f(r.confidence_95.0), f(r.confidence_95.1));
    r.mean_diagonal = f(r.mean_diagonal);
    r.std_error_diagonal = f(r.std_error_diagonal);
    r.bound_diagonal = f(r.bound_diagonal);
    r.bound_eigen = f(r.bound_eigen);
    r
}

fn run_turbulence(cli: &Cli, args: &TurbulenceArgs, out: &mut dyn Write) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.spec.display())))?;
    let mut spec = EnsembleSpec::from_json_str(&text).map_err(|e| match e {
        Error::Json(_) => CliError::Usage(format!("{}: {e}", args.spec.display())),
        other => CliError::Numeric(other),
    })?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let nbar = PhotonBudget::new(args.nbar)?;
    let report = analyze(&spec, nbar, args.samples)?;
    let chain_holds = report.chain_holds;
    let detail = format!(
        "mean {:.6e} + 3 se {:.3e} vs eigen bound {:.6e} vs diagonal bound {:.6e} (nats)",
        report.mean, report.std_error, report.bound_eigen, report.bound_diagonal
    );
    let selected = match args.basis {
        Basis::Eigen => report.bound_eigen,
        Basis::Diagonal => report.bound_diagonal,
    };
    let unit = cli.unit;
    let report = report_in_unit(report, unit);
    if cli.json {
        let mut value = serde_json::to_value(&report).map_err(Error::from)?;
        value["basis"] = json!(args.basis);
        value["bound"] = json!(unit.from_nats(selected));
        value["seed"] = json!(spec.seed);
        emit_json(out, &value)?;
    } else {
        emit_table(
            out,
            &[
                ("units", unit.as_str().to_string()),
                ("samples", report.n_samples.to_string()),
                ("mean", format!("{:.12e}", report.mean)),
                ("std_error", format!("{:.3e}", report.std_error)),
                (
                    "confidence_95",
                    format!("[{:.12e}, {:.12e}]", report.confidence_95.0, report.confidence_95.1),
                ),
                ("mean_diagonal", format!("{:.12e}", report.mean_diagonal)),
                ("bound_eigen", format!("{:.12e}", report.bound_eigen)),
                ("bound_diagonal", format!("{:.12e}", report.bound_diagonal)),
                ("bound", format!("{:.12e} ({:?})", unit.from_nats(selected), args.basis)),
                ("schur_violations", report.schur_violations.to_string()),
                ("chain_holds", report.chain_holds.to_string()),
            ],
        )?;
    }
    if chain_holds {
        Ok(())
    } else {
        Err(CliError::ChainViolated(detail))
    }
}
