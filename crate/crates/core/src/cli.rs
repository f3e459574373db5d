//! Command-line front end: argument parsing, family construction and the
//! subcommand drivers behind the `gscheme` binary.
//!
//! | subcommand    | required flags                                                   |
//! |---------------|------------------------------------------------------------------|
//! | `gheat`       | `--delta`                                                        |
//! | `clt`         | `--n-list`                                                       |
//! | `lln`         | `--n-list`                                                       |
//! | `bsb`         | `--r --sigma-lo --sigma-hi --T --K --payoff --s0 --delta`        |
//! | `bounds`      | `--cphi --beta --T`                                              |
//! | `consistency` | none                                                             |
//! | `oracle`      | `--method`                                                       |
//!
//! Families are `builtin:pm-sigma`, `builtin:bsb`, `builtin:lln-box`,
//! `builtin:zero` or the path of a measure file. Exit codes: 0 success,
//! 1 runtime or I/O failure, 2 usage error, 3 failed check.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{ExperimentResult, ExperimentRow};
use crate::bounds::{compute_constants, consistency_bound, consistency_error, BoundVariant};
use crate::bsb::{bsb_price_with, bsb_rate_experiment, bsb_reference, BsbGridOptions, BsbSpec, Payoff, PayoffKind,
    Spacing,
};
use crate::clt::{clt_experiment, lln_experiment, Backend, ThetaSet};
use crate::error::{Error, Result};
use crate::io;
use crate::oracles::{
    brute_force_tree, bs_closed_form, classical_normal, crr_price, fine_grid_reference, maximal_sup, safe_half_width,
    FineGridOptions, OptionKind, ReferenceSolution,
};
use crate::scheme::{solve_grid, solve_lattice, Grid, SchemeConfig};
use crate::testfn::{CubicSpline, GaussianBump, HalfSquare, InitialData, Sine, SmoothTestFunction};
use crate::uncertainty::{builtin, UncertaintySet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Parsed command line.
#[derive(Debug, Clone, Parser)]
#[command(name = "gscheme", version, about = "Monotone scheme for G-equations under sublinear expectation")]
pub struct RunConfig {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// `builtin:pm-sigma|bsb|lln-box|zero` or a measure file.
    #[arg(long, default_value = "builtin:pm-sigma")]
    pub family: String,
    #[arg(long, default_value_t = 0.1)]
    pub sigma_lo: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma_hi: f64,
    /// Number of volatilities (default 2 for pm-sigma, 33 for bsb).
    #[arg(long = "nsigma")]
    pub n_sigma: Option<usize>,
    /// Rate of the bsb family.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta_lo: f64,
    #[arg(long, default_value_t = 0.1)]
    pub theta_hi: f64,
    /// Half spread of Y around each mean in the lln-box family.
    #[arg(long, default_value_t = 0.0)]
    pub spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsiChoice {
    Gaussian,
    Sine,
    Spline,
    HalfSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMethod {
    Bs,
    Crr,
    Classical,
    Tree,
    FineGrid,
    MaximalSup,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Scheme value u^Δ(T, x) for a family and initial data.
    Gheat {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value = "capped-relu")]
        phi: InitialData,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long)]
        delta: f64,
        /// Evaluation point, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        x: Vec<f64>,
        #[arg(long, default_value = "auto")]
        backend: Backend,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Write every time level of the grid solution to this CSV.
        #[arg(long)]
        dump_steps: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Robust CLT errors against a fine-grid reference and the explicit bound.
    Clt {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value = "capped-relu")]
        phi: InitialData,
        /// Defaults to the Hölder constant of `--phi`.
        #[arg(long)]
        cphi: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Law-of-large-numbers distances to Θ = [theta-lo, theta-hi].
    Lln {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uncertain-volatility option price.
    Bsb {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        sigma_lo: f64,
        #[arg(long)]
        sigma_hi: f64,
        #[arg(long = "T")]
        maturity: f64,
        #[arg(long = "K")]
        strike: f64,
        #[arg(long)]
        payoff: PayoffKind,
        #[arg(long)]
        cap: Option<f64>,
        #[arg(long)]
        s0: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "nsigma", default_value_t = crate::bsb::DEFAULT_N_SIGMA)]
        n_sigma: usize,
        #[arg(long, default_value_t = 2.5e-3)]
        h: f64,
        /// Use the spacing `h = κΔ` instead of a fixed `--h`.
        #[arg(long, value_name = "KAPPA")]
        h_per_delta: Option<f64>,
        /// Run a rate study over these time steps instead of a single price.
        #[arg(long, value_delimiter = ',')]
        rate_deltas: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explicit constants for a family.
    Bounds {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        cphi: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consistency error E(Δ, ψ) for Δ = 2^-k against a stated bound.
    Consistency {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value = "gaussian")]
        psi: PsiChoice,
        #[arg(long, default_value = "prop51_ii")]
        variant: BoundVariant,
        #[arg(long, default_value_t = 2)]
        k_min: u32,
        #[arg(long, default_value_t = 10)]
        k_max: u32,
        /// Evaluation points are `npoints` equispaced nodes of [-span, span].
        #[arg(long, default_value_t = 4.0)]
        span: f64,
        #[arg(long, default_value_t = 161)]
        npoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference values from the independent oracles.
    Oracle {
        #[arg(long, value_enum)]
        method: OracleMethod,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value = "capped-relu")]
        phi: InitialData,
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long = "K", default_value_t = 1.0)]
        strike: f64,
        #[arg(long, default_value_t = 1.0)]
        s0: f64,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        /// Steps of the brute-force tree.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        x: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl RunConfig {
    pub fn subcommand_name(&self) -> &'static str {
        match self.command {
            Command::Gheat { .. } => "gheat",
            Command::Clt { .. } => "clt",
            Command::Lln { .. } => "lln",
            Command::Bsb { .. } => "bsb",
            Command::Bounds { .. } => "bounds",
            Command::Consistency { .. } => "consistency",
            Command::Oracle { .. } => "oracle",
        }
    }
}

/// A parse failure together with the exit code it maps to.
#[derive(Debug)]
pub struct UsageError {
    pub code: i32,
    pub message: String,
}

/// Parses `argv` (including the program name). Help and version requests
/// come back as a `UsageError` with code 0.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    RunConfig::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let code = match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
            _ => EXIT_USAGE,
        };
        UsageError {
            code,
            message: e.render().to_string(),
        }
    })
}

pub fn build_family(args: &FamilyArgs) -> Result<UncertaintySet> {
    let Some(name) = args.family.strip_prefix("builtin:") else {
        return UncertaintySet::read_measure_file(&args.family);
    };
    let equal = args.sigma_lo == args.sigma_hi;
    match name {
        "pm-sigma" => {
            let n = args.n_sigma.unwrap_or(if equal { 1 } else { 2 });
            builtin::pm_sigma(&builtin::sigma_grid(args.sigma_lo, args.sigma_hi, n))
        }
        "bsb" => {
            let n = args.n_sigma.unwrap_or(if equal { 1 } else { crate::bsb::DEFAULT_N_SIGMA });
            builtin::bsb(args.r, &builtin::sigma_grid(args.sigma_lo, args.sigma_hi, n))
        }
        "lln-box" => builtin::lln_box(&[args.theta_lo, args.theta_hi], args.spread),
        "zero" => builtin::zero(),
        other => Err(Error::arg(format!(
            "unknown builtin family `{other}` (pm-sigma, bsb, lln-box, zero)"
        ))),
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub enum Output {
    Table(ExperimentResult),
    KeyValues(Vec<(String, f64)>),
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub output: Output,
    /// Metadata lines, written after the data prefixed by `#`.
    pub meta: Vec<String>,
    /// `Some(false)` turns into exit code 3.
    pub passed: Option<bool>,
}

impl Outcome {
    fn values(entries: Vec<(&str, f64)>, meta: Vec<String>) -> Self {
        Self {
            output: Output::KeyValues(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()),
            meta,
            passed: None,
        }
    }

    fn table(result: ExperimentResult, name: &str) -> Self {
        let mut meta = vec![result.verdict(name)];
        meta.extend(result.notes.iter().cloned());
        Self {
            passed: Some(result.passed),
            output: Output::Table(result),
            meta,
        }
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        match &self.output {
            Output::Table(r) => io::write_experiment(w, r, &self.meta),
            Output::KeyValues(kv) => {
                let entries: Vec<(&str, f64)> = kv.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                io::write_key_values(w, &entries, &self.meta)
            }
        }
    }
}

fn reference_note(r: &ReferenceSolution) -> String {
    let mut s = format!("reference by {} ({}), accuracy {:e}", r.method, r.resolution, r.accuracy);
    if let Some(w) = &r.warning {
        s.push_str(&format!("; warning: {w}"));
    }
    s
}

fn oracle_values(r: &ReferenceSolution) -> Outcome {
    Outcome::values(vec![("value", r.value), ("accuracy", r.accuracy)], vec![reference_note(r)])
}

fn holder_of(phi: InitialData, cphi: Option<f64>, beta: Option<f64>) -> Result<(f64, f64)> {
    match (cphi, beta, phi.holder()) {
        (Some(c), Some(b), _) => Ok((c, b)),
        (c, b, Some((c0, b0))) => Ok((c.unwrap_or(c0), b.unwrap_or(b0))),
        _ => Err(Error::arg("initial data is not Hölder continuous; pass --cphi and --beta")),
    }
}

fn dyadic_deltas(k_min: u32, k_max: u32) -> Result<Vec<f64>> {
    if k_min > k_max || k_max > 60 {
        return Err(Error::arg(format!("need k-min <= k-max <= 60, got {k_min}..{k_max}")));
    }
    Ok((k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect())
}

fn psi_of(choice: PsiChoice) -> Box<dyn SmoothTestFunction> {
    match choice {
        PsiChoice::Gaussian => Box::new(GaussianBump),
        PsiChoice::Sine => Box::new(Sine),
        PsiChoice::Spline => Box::new(CubicSpline),
        PsiChoice::HalfSquare => Box::new(HalfSquare),
    }
}

/// Runs the configured subcommand.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Gheat {
            family,
            phi,
            horizon,
            delta,
            x,
            backend,
            h,
            dump_steps,
            ..
        } => {
            let u = build_family(family)?;
            if x.len() != u.dim() {
                return Err(Error::arg(format!("--x has {} coordinates, the family has {}", x.len(), u.dim())));
            }
            if !(*delta > 0.0) {
                return Err(Error::arg(format!("time step must be positive, got {delta}")));
            }
            let n = crate::scheme::steps_in(*horizon, *delta);
            let phi = phi.as_fn();
            let on_grid = || -> Result<f64> {
                let grid = Grid::centered(x, safe_half_width(&u, *horizon, 6.0), *h)?;
                let sol = solve_grid(&u, &SchemeConfig::new(*delta, *horizon, grid)?, phi)?;
                if let Some(p) = dump_steps {
                    sol.write_steps_csv(p)?;
                }
                Ok(sol.final_step().interpolate(x))
            };
            let (value, method) = match backend {
                Backend::Lattice if dump_steps.is_some() => {
                    return Err(Error::arg("--dump-steps needs the grid backend"))
                }
                Backend::Grid => (on_grid()?, "grid"),
                _ if dump_steps.is_some() => (on_grid()?, "grid"),
                Backend::Lattice => (solve_lattice(&u, *delta, n, x, phi, None)?.value, "lattice"),
                Backend::Auto => match solve_lattice(&u, *delta, n, x, phi, None) {
                    Ok(s) => (s.value, "lattice"),
                    Err(Error::Resource(_)) => (on_grid()?, "grid"),
                    Err(e) => return Err(e),
                },
            };
            Ok(Outcome::values(
                vec![("value", value), ("delta", *delta), ("steps", n as f64)],
                vec![format!("backend {method}")],
            ))
        }
        Command::Clt {
            family,
            n_list,
            phi,
            cphi,
            beta,
            ..
        } => {
            let u = build_family(family)?;
            let (c_phi, beta) = holder_of(*phi, *cphi, *beta)?;
            let f = phi.as_fn();
            let origin = vec![0.0; u.dim()];
            let reference = fine_grid_reference(&u, f, 1.0, &origin, FineGridOptions::default())?;
            let res = clt_experiment(&u, f, c_phi, beta, n_list, Some(&reference))?;
            let mut out = Outcome::table(res, "clt");
            out.meta.push(reference_note(&reference));
            Ok(out)
        }
        Command::Lln { family, n_list, .. } => {
            let u = build_family(family)?;
            let theta = ThetaSet::interval(family.theta_lo, family.theta_hi)?;
            Ok(Outcome::table(lln_experiment(&u, &theta, n_list)?, "lln"))
        }
        Command::Bsb {
            r,
            sigma_lo,
            sigma_hi,
            maturity,
            strike,
            payoff,
            cap,
            s0,
            delta,
            n_sigma,
            h,
            h_per_delta,
            rate_deltas,
            ..
        } => {
            let payoff = match payoff {
                PayoffKind::Put => Payoff::Put { strike: *strike },
                PayoffKind::CappedCall => Payoff::call(*strike, *cap)?,
            };
            let n_sigma = if sigma_lo == sigma_hi { 1 } else { *n_sigma };
            let spec = BsbSpec::new(*r, *sigma_lo, *sigma_hi, *maturity, payoff, n_sigma, *delta)?;
            let spacing = match h_per_delta {
                Some(k) => Spacing::PerStep(*k),
                None => Spacing::Fixed(*h),
            };
            let opts = BsbGridOptions {
                spacing,
                half_width: None,
            };
            match rate_deltas {
                Some(deltas) => {
                    let reference = bsb_reference(&spec, *s0, FineGridOptions::default())?;
                    let res = bsb_rate_experiment(&spec, *s0, deltas, &reference, &opts)?;
                    let mut out = Outcome::table(res, "bsb-rate");
                    out.meta.push(reference_note(&reference));
                    Ok(out)
                }
                None => {
                    let p = bsb_price_with(&spec, *s0, &opts)?;
                    Ok(Outcome::values(
                        vec![("price", p.price), ("steps", p.steps as f64)],
                        vec![format!("method {}", p.method)],
                    ))
                }
            }
        }
        Command::Bounds {
            family,
            cphi,
            beta,
            horizon,
            ..
        } => {
            let u = build_family(family)?;
            let rep = compute_constants(&u.validate(), *cphi, *beta, *horizon)?;
            let mut meta = Vec::new();
            if !rep.c_explicit_applicable {
                meta.push("c_explicit is only established for d = 1 and T = 1".into());
            }
            Ok(Outcome::values(rep.entries(), meta))
        }
        Command::Consistency {
            family,
            psi,
            variant,
            k_min,
            k_max,
            span,
            npoints,
            ..
        } => {
            let u = build_family(family)?;
            let psi = psi_of(*psi);
            if *npoints < 2 || !(*span > 0.0) {
                return Err(Error::arg("need at least two points and a positive span"));
            }
            let points: Vec<Vec<f64>> = (0..*npoints)
                .map(|i| vec![-span + 2.0 * span * i as f64 / (*npoints - 1) as f64])
                .collect();
            let m = u.validate();
            let norms = psi.norms();
            let rows = dyadic_deltas(*k_min, *k_max)?
                .into_iter()
                .map(|d| {
                    let e = consistency_error(&u, d, psi.as_ref(), &points)?;
                    let b = consistency_bound(&m, &norms, d, *variant)?;
                    Ok(ExperimentRow::new(d, e, Some(b)))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut out = Outcome::table(ExperimentResult::from_rows(rows), "consistency");
            out.meta.push(format!("psi {}, bound {variant:?}", psi.name()));
            Ok(out)
        }
        Command::Oracle {
            method,
            family,
            phi,
            sigma,
            horizon,
            strike,
            s0,
            delta,
            n,
            x,
            ..
        } => match method {
            OracleMethod::Bs => {
                let v = bs_closed_form(family.r, *sigma, *horizon, *strike, *s0, OptionKind::Put)?;
                Ok(Outcome::values(vec![("value", v)], vec!["Black-Scholes put".into()]))
            }
            OracleMethod::Crr => {
                let k = *strike;
                let v = crr_price(family.r, *sigma, *horizon, *delta, *s0, |s| (k - s).max(0.0))?;
                Ok(Outcome::values(vec![("value", v)], vec!["CRR put".into()]))
            }
            OracleMethod::Classical => {
                let phi = *phi;
                Ok(oracle_values(&classical_normal(*sigma, move |y| phi.eval(y))?))
            }
            OracleMethod::Tree => {
                let u = build_family(family)?;
                Ok(oracle_values(&brute_force_tree(&u, *delta, *n, x, phi.as_fn())?))
            }
            OracleMethod::FineGrid => {
                let u = build_family(family)?;
                Ok(oracle_values(&fine_grid_reference(
                    &u,
                    phi.as_fn(),
                    *horizon,
                    x,
                    FineGridOptions::default(),
                )?))
            }
            OracleMethod::MaximalSup => {
                let theta = ThetaSet::interval(family.theta_lo, family.theta_hi)?;
                Ok(oracle_values(&maximal_sup(&theta, phi.as_fn())?))
            }
        },
    }
}

fn configure_threads() {
    let n = std::env::var("GSCHEME_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if n > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already configured: {e}");
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Argument(_) | Error::Validation(_) | Error::Unsupported(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(e) => {
            if e.code == EXIT_OK {
                print!("{}", e.message);
            } else {
                eprint!("{}", e.message);
            }
            return e.code;
        }
    };
    let level = match cfg.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    configure_threads();

    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("gscheme {}: {e}", cfg.subcommand_name());
            return exit_code_for(&e);
        }
    };
    let out_path = match &cfg.command {
        Command::Gheat { out, .. }
        | Command::Clt { out, .. }
        | Command::Lln { out, .. }
        | Command::Bsb { out, .. }
        | Command::Bounds { out, .. }
        | Command::Consistency { out, .. }
        | Command::Oracle { out, .. } => out.clone(),
    };
    let written = match &out_path {
        Some(p) => std::fs::File::create(p)
            .map_err(|e| Error::io(p, e))
            .and_then(|f| outcome.write(std::io::BufWriter::new(f)))
            .map_err(|e| match e {
                Error::Io { source, .. } => Error::io(p, source),
                other => other,
            }),
        None => outcome.write(std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("gscheme {}: {e}", cfg.subcommand_name());
        return EXIT_RUNTIME;
    }
    if out_path.is_some() {
        for m in &outcome.meta {
            println!("{m}");
        }
    }
    match outcome.passed {
        Some(false) => EXIT_CHECK_FAILED,
        _ => EXIT_OK,
    }
}
