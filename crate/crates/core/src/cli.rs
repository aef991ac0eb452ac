//! Command-line front end. [`run`] returns the process exit code.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::experiments::{scan, svg_line_plot, Range, TOL_SLOPE};
use crate::jacobi::{FamilyConfig, JacobiCoefficients};
use crate::mfunction::{im_m_boundary, radial_probe, WeightFunction};
use crate::probe::{divergence_probe, doubling_cutoffs, DivergenceProbe};
use crate::quadrature::QuadratureSpec;
use crate::spectral::{eigs_outside, SpectrumOptions};
use crate::sumrules::{build_report, Flag, Rule, SumRuleReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "jacobi-sumrules",
    version,
    about = "Sum rules and Szegő diagnostics for Jacobi matrices"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Absolute quadrature tolerance.
    #[arg(long = "quad-tol", global = true, default_value_t = 1e-10)]
    pub quad_tol: f64,
    /// Seed of the inverse-iteration start vectors.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Functionals and rule residuals of one matrix, as JSON.
    Report(ReportArgs),
    /// Region classification over an (alpha, beta) grid, as CSV.
    Scan(ScanArgs),
    /// Functionals along the truncation sequence J_N, as CSV.
    Probe(ProbeArgs),
    /// Radial log-integrals I(r) and the boundary value, as CSV.
    Radial(RadialArgs),
    /// Eigenvalues outside [-2, 2] with weights, as JSON.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated rules, e.g. c0,p2,case:1; "all" for the standard set.
    #[arg(long, default_value = "c0,p2")]
    pub rules: String,
    /// Largest residual accepted for exit code 0.
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[arg(long = "residuals-csv")]
    pub residuals_csv: Option<PathBuf>,
    /// Writes theta, Im M(e^{i theta}) on a uniform grid.
    #[arg(long = "boundary-csv")]
    pub boundary_csv: Option<PathBuf>,
    /// Cutoffs of the divergence check for generated families.
    #[arg(long, value_delimiter = ',')]
    pub cutoffs: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// min:max:step
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// min:max:step
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    #[arg(long = "n", default_value_t = 10_000)]
    pub n: usize,
    #[arg(long = "tol-slope", default_value_t = TOL_SLOPE)]
    pub tol_slope: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub cutoffs: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Slopes and flags as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadialArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// unit, 1+cos, 1-cos, sinsq, cosmix:p
    #[arg(long, default_value = "unit")]
    pub weight: String,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99,0.999")]
    pub radii: Vec<f64>,
    /// Adds g(r) sin(phi) with g(r) = (1/r - r)/a_1^2 inside the logarithm.
    #[arg(long)]
    pub shifted: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Eigenvalue tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

enum Failure {
    Usage(String),
    Diverged(String),
    Residual(String),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DivergenceDetected { .. } => Failure::Diverged(e.to_string()),
            e => Failure::Error(e),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Diverged(m)) => {
            eprintln!("divergence: {m}");
            EXIT_DIVERGENCE
        }
        Err(Failure::Residual(m)) => {
            eprintln!("{m}");
            EXIT_ERROR
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult {
    if !(cli.common.quad_tol > 0.0) {
        return Err(Failure::Usage("--quad-tol must be positive".into()));
    }
    let quad = QuadratureSpec::with_tol(cli.common.quad_tol);
    let opts = SpectrumOptions {
        seed: cli.common.seed,
        ..SpectrumOptions::default()
    };
    match &cli.command {
        Command::Report(a) => cmd_report(a, &quad, &opts),
        Command::Scan(a) => cmd_scan(a),
        Command::Probe(a) => cmd_probe(a, &quad, &opts),
        Command::Radial(a) => cmd_radial(a, &quad),
        Command::Spectrum(a) => cmd_spectrum(a, &opts),
    }
}

fn load_config(path: &Path) -> std::result::Result<FamilyConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Error(Error::InvalidArgument(format!("{}: {e}", path.display()))))?;
    FamilyConfig::from_json_str(&text)
        .map_err(|e| Failure::Error(Error::InvalidArgument(format!("{}: {e}", path.display()))))
}

fn emit(path: Option<&PathBuf>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Error(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_rules(s: &str) -> std::result::Result<Vec<Rule>, Failure> {
    if s.trim() == "all" {
        return Ok(Rule::standard_set());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.parse::<Rule>().map_err(|e| Failure::Usage(e.to_string())))
        .collect()
}

/// Quantities a rule needs to be finite.
fn needed(rule: &Rule) -> &'static [&'static str] {
    match rule {
        Rule::C0 => &["Z", "A0", "E0"],
        Rule::P2 => &["Z2minus", "A2", "E2"],
        Rule::Z1Plus => &["Z1plus", "A1plus"],
        Rule::Z1Minus => &["Z1minus", "A1minus"],
        Rule::Quasi(_) => &["Z2minus"],
        Rule::OneSided { plus: true, .. } => &["Z1plus"],
        Rule::OneSided { plus: false, .. } => &["Z1minus"],
        _ => &["Z"],
    }
}

fn cmd_report(a: &ReportArgs, quad: &QuadratureSpec, opts: &SpectrumOptions) -> CliResult {
    let rules = parse_rules(&a.rules)?;
    if rules.is_empty() {
        return Err(Failure::Usage("no rules requested".into()));
    }
    let config = load_config(&a.config)?;
    let j = config.build()?;
    let mut verdict: Option<String> = None;
    let probe = if config.is_generated() {
        let cutoffs = a
            .cutoffs
            .clone()
            .unwrap_or_else(|| doubling_cutoffs((config.cutoff() / 32).max(1), config.cutoff()));
        let p = divergence_probe(&j, &cutoffs, quad, opts)?;
        for rule in &rules {
            for q in needed(rule) {
                let flag = p.flags[*q];
                if flag != Flag::Finite && verdict.is_none() {
                    verdict = Some(format!("{q} is {flag:?} along the truncation sequence (rule {rule})"));
                }
            }
        }
        Some(p)
    } else {
        None
    };
    let mut report: SumRuleReport = build_report(&j, &rules, quad, opts)?;
    if let Some(p) = &probe {
        report.flags = p
            .flags
            .iter()
            .filter(|(k, _)| k.as_str() != "C0gap" && k.as_str() != "Y1")
            .map(|(k, v)| (k.clone(), *v))
            .collect();
    }
    emit(
        a.out.as_ref(),
        &(serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n"),
    )?;
    if let Some(p) = &a.residuals_csv {
        emit(Some(p), &report.residual_csv())?;
    }
    if let Some(p) = &a.boundary_csv {
        let mut s = String::from("theta,im_m\n");
        for k in 1..512 {
            let t = PI * k as f64 / 512.0;
            let _ = writeln!(s, "{t:?},{:?}", im_m_boundary(&j, t));
        }
        emit(Some(p), &s)?;
    }
    if let Some(v) = verdict {
        return Err(Failure::Diverged(v));
    }
    let failing: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !(c.residual <= a.threshold))
        .map(|c| format!("{} (residual {:e})", c.rule, c.residual))
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Residual(format!(
            "residuals above threshold {:e}: {}",
            a.threshold,
            failing.join(", ")
        )))
    }
}

fn cmd_scan(a: &ScanArgs) -> CliResult {
    let alpha: Range = a.alpha.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let beta: Range = a.beta.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    if a.n < 100 {
        return Err(Failure::Usage("--n must be at least 100".into()));
    }
    if !(a.tol_slope > 0.0) {
        return Err(Failure::Usage("--tol-slope must be positive".into()));
    }
    let grid = scan(&alpha, &beta, a.n, a.tol_slope)?;
    emit(a.out.as_ref(), &grid.to_csv())?;
    if let Some(p) = &a.svg {
        emit(Some(p), &grid.to_svg())?;
    }
    Ok(())
}

fn probe_svg(p: &DivergenceProbe) -> String {
    let x: Vec<f64> = p.rows.iter().map(|r| (r.n as f64).ln()).collect();
    let series: Vec<(&str, Vec<f64>)> = ["Z", "A0", "E0", "Z1plus", "Z1minus"]
        .into_iter()
        .map(|q| (q, p.column(q)))
        .collect();
    svg_line_plot("functionals of J_N against ln N", &x, &series)
}

fn cmd_probe(a: &ProbeArgs, quad: &QuadratureSpec, opts: &SpectrumOptions) -> CliResult {
    let config = load_config(&a.config)?;
    let max = a.cutoffs.iter().copied().max().unwrap_or(1);
    let j = if config.is_generated() {
        JacobiCoefficients::build(&config.family, max.max(config.cutoff()))?
    } else {
        config.build()?
    };
    let p = divergence_probe(&j, &a.cutoffs, quad, opts).map_err(|e| match e {
        Error::InvalidArgument(m) => Failure::Usage(m),
        e => e.into(),
    })?;
    emit(a.out.as_ref(), &p.to_csv())?;
    if let Some(path) = &a.summary {
        let summary = serde_json::json!({ "slopes": p.slopes, "flags": p.flags });
        emit(
            Some(path),
            &(serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n"),
        )?;
    }
    if let Some(path) = &a.svg {
        emit(Some(path), &probe_svg(&p))?;
    }
    Ok(())
}

fn cmd_radial(a: &RadialArgs, quad: &QuadratureSpec) -> CliResult {
    let w: WeightFunction = a.weight.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let j = load_config(&a.config)?.build()?;
    let p = radial_probe(&j, &w, &a.radii, quad, a.shifted).map_err(|e| match e {
        Error::InvalidArgument(m) => Failure::Usage(m),
        e => e.into(),
    })?;
    let mut s = String::from("r,I,gap,min_ratio\n");
    for ((r, v), m) in p.radii.iter().zip(&p.values).zip(&p.min_ratio) {
        let _ = writeln!(s, "{r:?},{v:?},{:?},{m:?}", (v - p.boundary).abs());
    }
    let _ = writeln!(s, "1.0,{:?},0.0,", p.boundary);
    emit(a.out.as_ref(), &s)
}

fn cmd_spectrum(a: &SpectrumArgs, opts: &SpectrumOptions) -> CliResult {
    if !(a.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let j = load_config(&a.config)?.build()?;
    let s = eigs_outside(
        &j,
        &SpectrumOptions {
            tol: a.tol,
            ..opts.clone()
        },
    )?;
    emit(
        a.out.as_ref(),
        &(serde_json::to_string_pretty(&s).map_err(Error::from)? + "\n"),
    )
}
