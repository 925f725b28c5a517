//! Command-line front end for the semicircle-correction library: run the
//! verification reports, emit density curves and moment tables, and sample
//! ensembles.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or parameter error,
//! 3 I/O error. Output files are byte-stable for a fixed command line.

mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use semicircle::consistency::{
    all_pass, contradiction_report_with, corrected_report_with, CheckReport, Expectation, McConfig,
    Tolerances,
};
use semicircle::ensembles::EnsembleSpec;
use semicircle::exact_moments::{
    brute_force_trace_moment, general_trace_moment, offdiag_trace_moment, MomentSequence,
    ENUMERATION_BUDGET,
};
use semicircle::series::{expand_form, moments_from_series, DEFAULT_ORDER};
use semicircle::spectra::{empirical_density, estimate_scaled_moment, scaled_eigenvalues};
use semicircle::{analytic::SpectralMeasure, FormTag};

#[derive(Parser)]
#[command(
    name = "semicircle",
    version,
    about = "Finite-size corrections to the Wigner semicircle law: \
             verification reports, density curves, moment tables, sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the contradiction and corrected-formula consistency reports
    Verify(VerifyArgs),
    /// Emit density curves on a uniform grid plus the edge atoms
    Density(DensityArgs),
    /// Tabulate trace moments across the independent routes
    Moments(MomentsArgs),
    /// Sample matrices; dump scaled eigenvalues and their histogram
    Sample(SampleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ensemble {
    /// Zero diagonal, off-diagonal entries +-w
    Sign,
    /// Gaussian entries: off-diagonal variance w^2, diagonal 2w^2
    Goe,
    /// Off-diagonal scale w with chosen --v2 and --kappa4
    General,
}

#[derive(Args)]
struct VerifyArgs {
    /// Off-diagonal scale (must be positive)
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Diagonal variance (absolute units; default: sign-ensemble 0)
    #[arg(long, default_value_t = 0.0)]
    v2: f64,
    /// Off-diagonal fourth cumulant (absolute; default: sign-ensemble -2w^4)
    #[arg(long)]
    kappa4: Option<f64>,
    /// Add the Monte Carlo fit checks (slow at the default sample count)
    #[arg(long)]
    with_mc: bool,
    /// Matrix dimensions for the Monte Carlo fit (repeatable)
    #[arg(long = "N", default_values_t = [64usize, 128, 256, 512])]
    n: Vec<usize>,
    /// Monte Carlo samples per dimension
    #[arg(long, default_value_t = 40_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override the quadrature-versus-exact tolerance
    #[arg(long)]
    tol_quadrature: Option<f64>,
    /// Override the flawed-density comparison tolerance
    #[arg(long)]
    tol_flawed: Option<f64>,
    /// Override the Monte Carlo standard-error multiplier
    #[arg(long)]
    mc_sigma: Option<f64>,
}

#[derive(Args)]
struct DensityArgs {
    /// Off-diagonal scale (must be positive)
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Diagonal variance for the general column (default: sign-ensemble 0)
    #[arg(long, default_value_t = 0.0)]
    v2: f64,
    /// Fourth cumulant for the general column (default: sign-ensemble -2w^4)
    #[arg(long)]
    kappa4: Option<f64>,
    /// Grid points across [-2w, 2w]
    #[arg(long, default_value_t = 401)]
    points: usize,
    /// Density table path; CSV also writes atoms.csv in the same directory
    #[arg(long, default_value = "density.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, value_enum, default_value_t = Ensemble::Sign)]
    ensemble: Ensemble,
    /// Off-diagonal scale (must be positive)
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Diagonal variance (only with --ensemble general)
    #[arg(long)]
    v2: Option<f64>,
    /// Off-diagonal fourth cumulant (only with --ensemble general)
    #[arg(long)]
    kappa4: Option<f64>,
    /// Matrix dimensions (repeatable)
    #[arg(long = "N", required = true)]
    n: Vec<u64>,
    /// Trace powers (repeatable, even, 2 through 8)
    #[arg(long = "p", default_values_t = [2u32, 4, 6, 8])]
    p: Vec<u32>,
    /// Add a Monte Carlo row per (N, p)
    #[arg(long)]
    with_mc: bool,
    /// Monte Carlo samples (with --with-mc)
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Table path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Ensemble::Sign)]
    ensemble: Ensemble,
    /// Off-diagonal scale (must be positive)
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Diagonal variance (only with --ensemble general)
    #[arg(long)]
    v2: Option<f64>,
    /// Off-diagonal fourth cumulant (only with --ensemble general)
    #[arg(long)]
    kappa4: Option<f64>,
    /// Matrix dimension
    #[arg(long = "N")]
    n: usize,
    /// Number of sampled matrices pooled into the histogram
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Histogram bins over [-2w - 1/2, 2w + 1/2]
    #[arg(long, default_value_t = 64)]
    bins: usize,
    /// Eigenvalue table path; CSV also writes histogram.csv alongside
    #[arg(long, default_value = "eigenvalues.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum CliError {
    Usage(String),
    Core(semicircle::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Core(semicircle::Error::Io(_)) | CliError::Io(_) => ExitCode::from(3),
            CliError::Core(_) => ExitCode::from(2),
        }
    }
}

impl From<semicircle::Error> for CliError {
    fn from(e: semicircle::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(args) => run_verify(args),
        Command::Density(args) => run_density(args),
        Command::Moments(args) => run_moments(args),
        Command::Sample(args) => run_sample(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn require_positive_scale(w: f64) -> Result<(), CliError> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--w must be positive, got {w}")))
    }
}

/// Resolves the ensemble selection into a sampler plus its absolute
/// `(v2, kappa4)`; `--v2`/`--kappa4` are reserved for `general`.
fn resolve_ensemble(
    ensemble: Ensemble,
    w: f64,
    v2: Option<f64>,
    kappa4: Option<f64>,
) -> Result<(EnsembleSpec<f64>, f64, f64), CliError> {
    if ensemble != Ensemble::General && (v2.is_some() || kappa4.is_some()) {
        return Err(CliError::Usage(
            "--v2/--kappa4 only apply to --ensemble general".into(),
        ));
    }
    Ok(match ensemble {
        Ensemble::Sign => (EnsembleSpec::sign(w)?, 0.0, -2.0 * w.powi(4)),
        Ensemble::Goe => (EnsembleSpec::goe(w)?, 2.0 * w * w, 0.0),
        Ensemble::General => {
            let (v2, kappa4) = match (v2, kappa4) {
                (Some(v2), Some(kappa4)) => (v2, kappa4),
                _ => {
                    return Err(CliError::Usage(
                        "--ensemble general needs both --v2 and --kappa4".into(),
                    ))
                }
            };
            (EnsembleSpec::general(w, v2, kappa4)?, v2, kappa4)
        }
    })
}

fn verify_csv(checks: &[CheckReport]) -> String {
    let mut text = output::csv_line(&[
        "check_id",
        "route",
        "value",
        "expected",
        "expected_delta",
        "delta",
        "tolerance",
        "pass",
    ]);
    for check in checks {
        let (expected, expected_delta) = match check.expected {
            Expectation::Equal => ("equal", String::new()),
            Expectation::UnequalBy { delta } => ("unequal", output::float(delta)),
        };
        for (route, value) in &check.routes {
            text.push_str(&output::csv_line(&[
                &check.check_id,
                route,
                &output::float(*value),
                expected,
                &expected_delta,
                &output::float(check.delta),
                &output::float(check.tolerance),
                if check.pass { "true" } else { "false" },
            ]));
        }
    }
    text
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    require_positive_scale(args.w)?;
    let kappa4 = args.kappa4.unwrap_or(-2.0 * args.w.powi(4));
    let mut tol = Tolerances::default();
    if let Some(q) = args.tol_quadrature {
        tol.quadrature = q;
    }
    if let Some(fl) = args.tol_flawed {
        tol.flawed = fl;
    }
    if let Some(s) = args.mc_sigma {
        tol.mc_sigma = s;
    }
    let mc = if args.with_mc {
        Some(McConfig {
            n_values: args.n.clone(),
            samples: args.samples,
            seed: args.seed,
        })
    } else {
        None
    };

    let mut checks = contradiction_report_with(args.w, &tol)?;
    checks.extend(corrected_report_with(
        args.w,
        args.v2,
        kappa4,
        mc.as_ref(),
        &tol,
    )?);
    let ok = all_pass(&checks);

    let text = match args.format {
        Format::Json => output::json_text(&serde_json::json!({
            "w": args.w,
            "v2": args.v2,
            "kappa4": kappa4,
            "all_pass": ok,
            "checks": checks,
        })),
        Format::Csv => verify_csv(&checks),
    };
    output::emit(args.out.as_deref(), &text)?;

    if ok {
        Ok(ExitCode::SUCCESS)
    } else {
        for check in checks.iter().filter(|c| !c.pass) {
            eprintln!("failed check: {}", check.check_id);
        }
        Ok(ExitCode::from(1))
    }
}

fn run_density(args: DensityArgs) -> Result<ExitCode, CliError> {
    require_positive_scale(args.w)?;
    let w = args.w;
    let kappa4 = args.kappa4.unwrap_or(-2.0 * w.powi(4));
    let general_tag = FormTag::GeneralCorrection {
        v2: args.v2 / (w * w),
        kappa4: kappa4 / w.powi(4),
    };

    let semicircle = SpectralMeasure::from_form(&FormTag::Semicircle, w)?;
    let universal = SpectralMeasure::from_form(&FormTag::GoeCorrection, w)?;
    let fixed = SpectralMeasure::from_form(&FormTag::SignCorrectionFixed, w)?;
    let general = SpectralMeasure::from_form(&general_tag, w)?;

    let grid = semicircle.support_grid(args.points)?;
    let mut atoms: Vec<_> = universal
        .atoms()
        .iter()
        .map(|a| (a.location, a.mass))
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("atom locations are finite"));

    match args.format {
        Format::Csv => {
            let mut table = output::csv_line(&[
                "lambda",
                "rho_w0",
                "rho_q_cont",
                "rho_r_star",
                "rho_r_general",
            ]);
            for &lambda in &grid {
                table.push_str(&output::csv_line(&[
                    &output::float(lambda),
                    &output::float(semicircle.density_value(lambda)),
                    &output::float(universal.density_value(lambda)),
                    &output::float(fixed.density_value(lambda)),
                    &output::float(general.density_value(lambda)),
                ]));
            }
            output::emit(Some(&args.out), &table)?;

            let mut atom_table = output::csv_line(&["location", "mass"]);
            for &(location, mass) in &atoms {
                atom_table.push_str(&output::csv_line(&[
                    &output::float(location),
                    &output::float(mass),
                ]));
            }
            output::emit(Some(&output::sibling(&args.out, "atoms.csv")), &atom_table)?;
        }
        Format::Json => {
            let rows: Vec<_> = grid
                .iter()
                .map(|&lambda| {
                    serde_json::json!({
                        "lambda": lambda,
                        "rho_w0": semicircle.density_value(lambda),
                        "rho_q_cont": universal.density_value(lambda),
                        "rho_r_star": fixed.density_value(lambda),
                        "rho_r_general": general.density_value(lambda),
                    })
                })
                .collect();
            let atom_rows: Vec<_> = atoms
                .iter()
                .map(|&(location, mass)| serde_json::json!({"location": location, "mass": mass}))
                .collect();
            let doc = serde_json::json!({
                "w": w,
                "v2": args.v2,
                "kappa4": kappa4,
                "grid": rows,
                "atoms": atom_rows,
            });
            output::emit(Some(&args.out), &output::json_text(&doc))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

struct MomentRow {
    n: u64,
    p: u32,
    route: &'static str,
    value: f64,
}

fn rational_f64(q: &BigRational) -> f64 {
    q.to_f64().expect("tabulated moments stay in f64 range")
}

fn run_moments(args: MomentsArgs) -> Result<ExitCode, CliError> {
    require_positive_scale(args.w)?;
    for &p in &args.p {
        if p == 0 || p % 2 != 0 || p > 8 {
            return Err(CliError::Usage(format!(
                "--p must be even and between 2 and 8, got {p}"
            )));
        }
    }
    for &n in &args.n {
        if n == 0 {
            return Err(CliError::Usage("--N must be at least 1".into()));
        }
    }
    let (spec, _, _) = resolve_ensemble(args.ensemble, args.w, args.v2, args.kappa4)?;
    let max_p = args.p.iter().copied().max().unwrap_or(2);
    let sigma = MomentSequence::from_distribution(spec.offdiag(), max_p);
    let tau = MomentSequence::from_distribution(spec.diag(), max_p);

    // Exact first-two-order coefficients from the series route, shared by
    // every N: leading from the limiting resolvent, subleading from the
    // correction forms.
    let w_rat = BigRational::from_float(args.w)
        .ok_or_else(|| CliError::Usage(format!("--w must be finite, got {}", args.w)))?;
    let tag_rat = spec
        .correction_tag()
        .map_params(|x| BigRational::from_float(*x).expect("tag parameters are finite"));
    let lead_series = expand_form(&FormTag::Semicircle, &w_rat, DEFAULT_ORDER)?;
    let sub_series = expand_form(&FormTag::GoeCorrection, &w_rat, DEFAULT_ORDER)?
        .add(&expand_form(&tag_rat, &w_rat, DEFAULT_ORDER)?);
    let lead_moments = moments_from_series(&lead_series, max_p as usize)?;
    let sub_moments = moments_from_series(&sub_series, max_p as usize)?;

    let semicircle = SpectralMeasure::from_form(&FormTag::Semicircle, args.w)?;
    let universal = SpectralMeasure::from_form(&FormTag::GoeCorrection, args.w)?;
    let ensemble_part = SpectralMeasure::from_form(&spec.correction_tag(), args.w)?;

    let mut rows = Vec::new();
    for &n in &args.n {
        for &p in &args.p {
            let half = p / 2;
            // closed_form: exact finite-N expectation where a closed form
            // exists (any p <= 8 for a zero diagonal, p <= 6 otherwise).
            let closed = if tau.is_identically_zero() {
                Some(offdiag_trace_moment(n, p, &sigma)?)
            } else if p <= 6 {
                Some(general_trace_moment(n, p, &sigma, &tau)?)
            } else {
                None
            };
            if let Some(value) = &closed {
                rows.push(MomentRow {
                    n,
                    p,
                    route: "closed_form",
                    value: rational_f64(value),
                });
            }
            if u128::from(n)
                .checked_pow(p)
                .is_some_and(|c| c <= ENUMERATION_BUDGET)
            {
                let value = brute_force_trace_moment(n, p, &sigma, &tau)?;
                rows.push(MomentRow {
                    n,
                    p,
                    route: "brute_force",
                    value: rational_f64(&value),
                });
            }
            // series / quadrature: two-term prediction
            // leading * N^(1 + p/2) + subleading * N^(p/2).
            let n_big = BigInt::from(n);
            let n_lead = BigRational::from_integer(n_big.pow(half + 1));
            let n_sub = BigRational::from_integer(n_big.pow(half));
            let series_value =
                &lead_moments[p as usize] * &n_lead + &sub_moments[p as usize] * &n_sub;
            rows.push(MomentRow {
                n,
                p,
                route: "series",
                value: rational_f64(&series_value),
            });
            let nf = n as f64;
            let quad_value = semicircle.moment(p) * nf.powi(half as i32 + 1)
                + (universal.moment(p) + ensemble_part.moment(p)) * nf.powi(half as i32);
            rows.push(MomentRow {
                n,
                p,
                route: "quadrature",
                value: quad_value,
            });
            if args.with_mc {
                let est = estimate_scaled_moment(&spec, n as usize, p, args.samples, args.seed)?;
                rows.push(MomentRow {
                    n,
                    p,
                    route: "monte_carlo",
                    value: est.mean * nf.powi(half as i32 + 1),
                });
            }
        }
    }

    let text = match args.format {
        Format::Csv => {
            let mut table = output::csv_line(&["N", "p", "route", "value"]);
            for row in &rows {
                table.push_str(&output::csv_line(&[
                    &row.n.to_string(),
                    &row.p.to_string(),
                    row.route,
                    &output::float(row.value),
                ]));
            }
            table
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "n": r.n, "p": r.p, "route": r.route, "value": r.value,
                    })
                })
                .collect();
            output::json_text(&serde_json::json!({ "rows": rows }))
        }
    };
    output::emit(args.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run_sample(args: SampleArgs) -> Result<ExitCode, CliError> {
    require_positive_scale(args.w)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if args.n == 0 {
        return Err(CliError::Usage("--N must be at least 1".into()));
    }
    let (spec, _, _) = resolve_ensemble(args.ensemble, args.w, args.v2, args.kappa4)?;

    let mut pooled = Vec::with_capacity(args.n * args.samples);
    let mut rows = Vec::with_capacity(args.n * args.samples);
    for sample in 0..args.samples as u64 {
        let eig = scaled_eigenvalues(&spec, args.n, args.seed, sample)?;
        for (index, &lambda) in eig.iter().enumerate() {
            rows.push((sample, index, lambda));
        }
        pooled.extend(eig);
    }
    let (lo, hi) = (-2.0 * args.w - 0.5, 2.0 * args.w + 0.5);
    let histogram = empirical_density(&pooled, lo, hi, args.bins)?;

    match args.format {
        Format::Csv => {
            let mut table = output::csv_line(&["sample", "index", "lambda"]);
            for &(sample, index, lambda) in &rows {
                table.push_str(&output::csv_line(&[
                    &sample.to_string(),
                    &index.to_string(),
                    &output::float(lambda),
                ]));
            }
            output::emit(Some(&args.out), &table)?;

            let mut hist_table = output::csv_line(&["left", "right", "height"]);
            for (i, &height) in histogram.heights().iter().enumerate() {
                let (left, right) = histogram.edges(i);
                hist_table.push_str(&output::csv_line(&[
                    &output::float(left),
                    &output::float(right),
                    &output::float(height),
                ]));
            }
            output::emit(
                Some(&output::sibling(&args.out, "histogram.csv")),
                &hist_table,
            )?;
        }
        Format::Json => {
            let eigen_rows: Vec<_> = rows
                .iter()
                .map(|&(sample, index, lambda)| {
                    serde_json::json!({
                        "sample": sample, "index": index, "lambda": lambda,
                    })
                })
                .collect();
            let hist_rows: Vec<_> = histogram
                .heights()
                .iter()
                .enumerate()
                .map(|(i, &height)| {
                    let (left, right) = histogram.edges(i);
                    serde_json::json!({"left": left, "right": right, "height": height})
                })
                .collect();
            let doc = serde_json::json!({
                "n": args.n,
                "samples": args.samples,
                "seed": args.seed,
                "eigenvalues": eigen_rows,
                "histogram": hist_rows,
            });
            output::emit(Some(&args.out), &output::json_text(&doc))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
