//! Command-line front end. Numbers are written with 12 significant digits.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::BoundReport;
use crate::coarse::{distribution, BinningScheme, ProbabilityDistribution};
use crate::entropy::conjugate_order;
use crate::error::{invalid, Error, Result};
use crate::harness::{
    evaluate_case, log_widths, sweep_bounds, verify_state_with, width_scan, BasisChoice,
    CaseInputs, HarnessConfig, StateDescriptor, VerificationCase,
};
use crate::prolate::{solve_concentration, DEFAULT_NODES};
use crate::state::fourier_transform;

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of the `bounds` CSV output.
pub const BOUNDS_COLUMNS: [&str; 11] = [
    "gamma",
    "alpha",
    "beta",
    "lambda0",
    "c_max",
    "bound_mu",
    "bound_deutsch",
    "bound_beckner",
    "beckner_valid",
    "best_ab",
    "best_qp",
];

const BOUNDS_HELP: &str = "\
Tabulates every lower bound on a grid of gamma = dx*dp/hbar and Renyi orders.

CSV columns (fixed order):
  gamma          bin-width product dx*dp/hbar
  alpha, beta    conjugate Renyi orders, 1/alpha + 1/beta = 2
  lambda0        largest eigenvalue of the sinc-kernel concentration operator
  c_max          sqrt(lambda0), largest overlap between a position bin and a momentum bin
  bound_mu       -ln(lambda0), bound for the intra-bin refined entropies
  bound_deutsch  -2 ln((1 + sqrt(lambda0))/2), bound for the bin-mass entropies
  bound_beckner  Beckner-type bound from the Babenko-Beckner inequality (raw value)
  beckner_valid  true when gamma is below the order-dependent threshold (e*pi for Shannon)
  best_ab        largest valid bound for the refined entropies
  best_qp        largest valid bound for the bin-mass entropies

JSON output: {\"schema_version\": 1, \"rows\": [...], \"crossovers\": [...]}; an invalid
Beckner bound is null in `bound_beckner` and kept in `bound_beckner_raw`.";

const EIG_HELP: &str = "\
Solves the concentration eigenproblem for the sinc kernel on [-1, 1].

Output fields:
  lambda0            largest eigenvalue, the maximal joint concentration in one position
                     bin and one momentum bin
  c_max              sqrt(lambda0)
  convergence_delta  |lambda0(N) - lambda0(N/2)|
  asymptote_ratio    lambda0 / (gamma/(2 pi)), tends to 1 as gamma -> 0
Exits nonzero when the solver does not converge.";

const VERIFY_HELP: &str = "\
Builds a state, bins it in position and momentum and checks every applicable bound.

Report fields per check:
  family       qp (bin masses q_k, p_l) or ab (intra-bin refined |a_km|^2, |b_ln|^2)
  check        concentration (-ln lambda0), single_bin (-2 ln((1+sqrt lambda0)/2)),
               beckner (when valid), best (largest valid bound)
  entropy_sum  H_alpha of the position side plus H_beta of the momentum side
  slack        entropy_sum - bound; enforced checks need slack >= -1e-8
The single-bin check requires max q_k + max p_l <= 1 + sqrt(lambda0).
Exits nonzero if any enforced slack is below -1e-8 or the case is unreliable
(captured mass below 0.999).";

const SCAN_HELP: &str = "\
Scans centered Gaussians over widths hbar^(1/2) * 2^(j/4), j = -steps..=steps, and
reports H_alpha(q) + H_beta(p) per width, the minimum, the best valid bin-mass
bound and the gap between them.";

#[derive(Debug, Parser)]
#[command(name = "locentropy", version, about = "Coarse-grained entropic uncertainty bounds")]
pub struct Cli {
    /// Reduced Planck constant.
    #[arg(long, global = true, default_value_t = 1.0, value_parser = positive)]
    pub hbar: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(about = "Largest eigenvalue of the concentration operator", long_about = EIG_HELP)]
    Eig(EigArgs),
    #[command(about = "Table of bounds over gamma and alpha", long_about = BOUNDS_HELP)]
    Bounds(BoundsArgs),
    #[command(about = "Check all bounds for one state", long_about = VERIFY_HELP)]
    Verify(VerifyArgs),
    #[command(about = "Entropy sums of Gaussians over a width scan", long_about = SCAN_HELP)]
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigArgs {
    /// gamma = dx*dp/hbar.
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Gauss-Legendre nodes.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Explicit gamma values (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = positive, conflicts_with_all = ["gamma_min", "gamma_max"])]
    pub gamma: Vec<f64>,
    /// Lower end of a log-spaced gamma grid.
    #[arg(long, value_parser = positive, default_value_t = 0.1)]
    pub gamma_min: f64,
    /// Upper end of a log-spaced gamma grid.
    #[arg(long, value_parser = positive, default_value_t = 20.0)]
    pub gamma_max: f64,
    /// Points of the log-spaced grid.
    #[arg(long, default_value_t = 41)]
    pub gamma_steps: usize,
    /// Renyi orders alpha >= 1 (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Relative tolerance of the crossover bisection.
    #[arg(long, default_value_t = 1e-6, value_parser = positive)]
    pub crossover_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl BoundsArgs {
    pub fn gamma_grid(&self) -> Result<Vec<f64>> {
        if !self.gamma.is_empty() {
            return Ok(self.gamma.clone());
        }
        if self.gamma_steps < 2 || self.gamma_max <= self.gamma_min {
            return Err(invalid("gamma grid", "need gamma_max > gamma_min and at least 2 steps"));
        }
        let ratio = (self.gamma_max / self.gamma_min).ln() / (self.gamma_steps - 1) as f64;
        Ok((0..self.gamma_steps)
            .map(|i| self.gamma_min * (ratio * i as f64).exp())
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Gaussian,
    Random,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    /// gamma = dx*dp/hbar with dx = dp = sqrt(gamma*hbar).
    #[arg(long, value_parser = positive, default_value_t = 1.0, conflicts_with_all = ["delta_x", "delta_p"])]
    pub gamma: f64,
    /// Position bin width (requires --delta-p).
    #[arg(long, value_parser = positive, requires = "delta_p")]
    pub delta_x: Option<f64>,
    /// Momentum bin width (requires --delta-x).
    #[arg(long, value_parser = positive, requires = "delta_x")]
    pub delta_p: Option<f64>,
}

impl SchemeArgs {
    fn scheme(&self, hbar: f64) -> Result<BinningScheme> {
        match (self.delta_x, self.delta_p) {
            (Some(dx), Some(dp)) => BinningScheme::new(dx, dp, hbar),
            _ => BinningScheme::symmetric(self.gamma, hbar),
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = StateKind::Gaussian)]
    pub state: StateKind,
    /// Gaussian position width.
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub width: f64,
    /// Gaussian center.
    #[arg(long, default_value_t = 0.0)]
    pub center: f64,
    /// Gaussian momentum shift.
    #[arg(long, default_value_t = 0.0)]
    pub shift: f64,
    /// Seed of the random state.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Packets in the random state.
    #[arg(long, default_value_t = 3)]
    pub packets: usize,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Renyi order alpha >= 1 of the position side.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Also check the intra-bin refined entropies.
    #[arg(long)]
    pub with_ab: bool,
    #[arg(long, value_enum, default_value_t = Basis::Legendre)]
    pub basis: Basis,
    #[arg(long, default_value_t = 32)]
    pub basis_size: usize,
    /// Samples per space on the symmetric grid.
    #[arg(long, default_value_t = 16384)]
    pub grid_count: usize,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Replace both bin-mass distributions by point masses (failure-path test).
    #[arg(long, hide = true)]
    pub inject_point_masses: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Fourier,
    Legendre,
}

impl From<Basis> for BasisChoice {
    fn from(b: Basis) -> Self {
        match b {
            Basis::Fourier => BasisChoice::Fourier,
            Basis::Legendre => BasisChoice::Legendre,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_parser = positive, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Quarter-octave steps on each side of sqrt(hbar).
    #[arg(long, default_value_t = 8)]
    pub steps: i32,
    #[arg(long, default_value_t = 16384)]
    pub grid_count: usize,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive and finite, got {s}"))
    }
}

/// Whether a command's checks all succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

/// Formats with 12 significant digits in scientific notation.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // avoid printing negative zero
        format!("{:.11e}", x + 0.0)
    }
}

fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes with every float rounded to 12 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| invalid("json", e.to_string()))?;
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| invalid("json", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn bounds_csv(rows: &[BoundReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| invalid("csv", e.to_string());
    w.write_record(BOUNDS_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            fmt_sig(r.gamma),
            fmt_sig(r.alpha),
            fmt_sig(r.beta),
            fmt_sig(r.lambda0),
            fmt_sig(r.c_max),
            fmt_sig(r.bound_mu),
            fmt_sig(r.bound_deutsch),
            fmt_sig(r.bound_beckner_raw),
            r.beckner_valid.to_string(),
            fmt_sig(r.best_ab),
            fmt_sig(r.best_qp),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn verify_csv(case: &VerificationCase) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| invalid("csv", e.to_string());
    w.write_record(["family", "check", "entropy_sum", "bound", "slack", "enforced"])
        .map_err(io)?;
    for c in &case.checks {
        let family = match c.family {
            crate::harness::Family::Qp => "qp",
            crate::harness::Family::Ab => "ab",
        };
        w.write_record([
            family.to_string(),
            c.name.clone(),
            fmt_sig(c.entropy_sum),
            fmt_sig(c.bound),
            fmt_sig(c.slack),
            c.enforced.to_string(),
        ])
        .map_err(io)?;
    }
    w.write_record([
        "qp".to_string(),
        "max_bin_sum".to_string(),
        fmt_sig(case.single_bin.max_sum),
        fmt_sig(case.single_bin.bound),
        fmt_sig(case.single_bin.slack),
        "true".to_string(),
    ])
    .map_err(io)?;
    let bytes = w.into_inner().map_err(|e| invalid("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| invalid("output", format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn unsupported(format: Format, command: &str) -> Error {
    invalid("format", format!("{format:?} is not available for {command}"))
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Eig(args) => cmd_eig(&args),
        Command::Bounds(args) => cmd_bounds(&args),
        Command::Verify(args) => cmd_verify(&args, cli.hbar),
        Command::Scan(args) => cmd_scan(&args, cli.hbar),
    }
}

fn cmd_eig(args: &EigArgs) -> Result<Outcome> {
    let s = solve_concentration(args.gamma, args.nodes)?;
    let ratio = s.lambda0 / (args.gamma / (2.0 * PI));
    let text = match args.format {
        Format::Text => {
            let mut t = String::new();
            let _ = writeln!(t, "gamma             {}", fmt_sig(s.gamma));
            let _ = writeln!(t, "nodes             {}", s.rule.nodes.len());
            let _ = writeln!(t, "lambda0           {}", fmt_sig(s.lambda0));
            let _ = writeln!(t, "c_max             {}", fmt_sig(s.c_max()));
            let _ = writeln!(t, "convergence_delta {}", fmt_sig(s.convergence_delta));
            let _ = writeln!(t, "converged         {}", s.converged);
            let _ = writeln!(t, "asymptote_ratio   {}", fmt_sig(ratio));
            t
        }
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "gamma": s.gamma,
            "nodes": s.rule.nodes.len(),
            "lambda0": s.lambda0,
            "c_max": s.c_max(),
            "convergence_delta": s.convergence_delta,
            "converged": s.converged,
            "asymptote_ratio": ratio,
            "spectrum_head": s.spectrum_head,
        }))?,
        Format::Csv => return Err(unsupported(args.format, "eig")),
    };
    emit(&args.out, &text)?;
    Ok(if s.converged { Outcome::Success } else { Outcome::Failure })
}

fn cmd_bounds(args: &BoundsArgs) -> Result<Outcome> {
    let gammas = args.gamma_grid()?;
    let report = sweep_bounds(&gammas, &args.alpha, args.nodes, args.crossover_tol)?;
    let text = match args.format {
        Format::Csv => bounds_csv(&report.rows)?,
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "rows": report.rows,
            "crossovers": report.crossovers,
        }))?,
        Format::Text => return Err(unsupported(args.format, "bounds")),
    };
    emit(&args.out, &text)?;
    Ok(Outcome::Success)
}

fn cmd_verify(args: &VerifyArgs, hbar: f64) -> Result<Outcome> {
    let config = HarnessConfig {
        grid_count: args.grid_count,
        hbar,
        node_count: args.nodes,
        basis_size: args.basis_size,
        basis: args.basis.into(),
    };
    let state = match args.state {
        StateKind::Gaussian => StateDescriptor::Gaussian {
            center: args.center,
            momentum_shift: args.shift,
            width: args.width,
        },
        StateKind::Random => StateDescriptor::Random {
            seed: args.seed,
            packets: args.packets,
        },
    };
    let inputs = CaseInputs {
        state,
        scheme: args.scheme.scheme(hbar)?,
        order: conjugate_order(args.alpha)?,
        with_ab: args.with_ab,
    };
    let solution = solve_concentration(inputs.scheme.gamma(), args.nodes)?;
    let case = if args.inject_point_masses {
        inject_point_masses(&config, &inputs, &solution)?
    } else {
        verify_state_with(&config, &inputs, &solution)?
    };
    let text = match args.format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "case": case,
        }))?,
        Format::Csv => verify_csv(&case)?,
        Format::Text => return Err(unsupported(args.format, "verify")),
    };
    emit(&args.out, &text)?;
    Ok(if case.passed && case.reliable {
        Outcome::Success
    } else {
        Outcome::Failure
    })
}

/// Runs the checks on point masses placed at the modal bins of the real state.
fn inject_point_masses(
    config: &HarnessConfig,
    inputs: &CaseInputs,
    solution: &crate::prolate::ConcentrationEigenSolution,
) -> Result<VerificationCase> {
    let psi = inputs.state.build(config.grid()?, config.hbar)?;
    let phi = fourier_transform(&psi)?;
    let modal = |d: &ProbabilityDistribution| {
        let (k, _) = d
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty distribution");
        ProbabilityDistribution::point_mass(k)
    };
    let q = modal(&distribution(&psi, &inputs.scheme)?);
    let p = modal(&distribution(&phi, &inputs.scheme)?);
    evaluate_case(inputs, config, &q, &p, None, solution)
}

fn cmd_scan(args: &ScanArgs, hbar: f64) -> Result<Outcome> {
    let config = HarnessConfig {
        grid_count: args.grid_count,
        hbar,
        node_count: args.nodes,
        ..HarnessConfig::default()
    };
    let scan = width_scan(
        &config,
        args.gamma,
        &log_widths(hbar, args.steps),
        conjugate_order(args.alpha)?,
    )?;
    let text = match args.format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "scan": scan,
        }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| invalid("csv", e.to_string());
            w.write_record(["width", "entropy_q", "entropy_p", "entropy_sum", "best_bound"])
                .map_err(io)?;
            for r in &scan.rows {
                w.write_record([
                    fmt_sig(r.width),
                    fmt_sig(r.entropy_q),
                    fmt_sig(r.entropy_p),
                    fmt_sig(r.entropy_sum),
                    fmt_sig(scan.best_bound),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| invalid("csv", e.to_string()))?;
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
        Format::Text => return Err(unsupported(args.format, "scan")),
    };
    emit(&args.out, &text)?;
    Ok(if scan.holds { Outcome::Success } else { Outcome::Failure })
}
