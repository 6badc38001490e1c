#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rtpz::cramer::{envelope, fit_cramer_exponent, probe_weak_cramer_with, DEFAULT_REFINE_ITERS, DEFAULT_WINDOW};
use rtpz::cramer::MixingFamily;
use rtpz::edgeworth::{average_cumulants, average_cumulants_bivariate, edgeworth_cdf_1d, edgeworth_kac_functional, exact_sum_cdf_oracle, Cdf};
use rtpz::gaussian_reference::{exact_expected_zeros, gaussian_kac_functional, gaussian_small_ball, sigma_n2};
use rtpz::harness::{run_experiment, run_suite, SuiteOverrides, DEFAULT_R, DEFAULT_THETA_EXPONENT};
use rtpz::special::normal_cdf;
use rtpz::trigpoly::{sample_polynomial, PolyRecord};
use rtpz::zeros::{default_grid, ZeroCounter};
use rtpz::{CoefficientLaw, DrawStream, ExperimentConfig, ExperimentKind, Method, Mode, PhasePolicy, Poly};

const EXIT_UNCERTIFIED: u8 = 2;

/// Zeros of random trigonometric polynomials.
///
/// With `--config` and no subcommand, runs every experiment of a suite file
/// and writes `NN_<kind>.csv` plus `report.json` into `--out-dir`.
#[derive(Parser)]
#[command(name = "rtpz", version)]
struct Cli {
    /// Suite config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write CSV and JSON reports here instead of printing CSV to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Mean zero count per degree against the Gaussian reference.
    Universality(ExperimentArgs),
    /// Frequency of a small exactness threshold, `omega_n < n^theta`.
    Threshold {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, default_value_t = DEFAULT_THETA_EXPONENT, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Count the zeros of one polynomial.
    CountZeros(CountArgs),
    /// Probe the weak Cramer condition `|phi(t)| <= 1 - C / t^b`.
    CramerProbe(CramerArgs),
    /// Monte Carlo small-ball probabilities at radius `n^-gamma`.
    SmallBall {
        #[command(flatten)]
        common: ExperimentArgs,
        #[arg(long, default_value_t = 0.6)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Edgeworth expansions against exact convolutions, or the corrected Kac functional.
    Edgeworth(EdgeworthArgs),
    /// Closed-form Gaussian references.
    GaussianExact {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = DEFAULT_R)]
        r: f64,
        /// Small-ball radius exponent.
        #[arg(long, default_value_t = 0.6)]
        gamma: f64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Builtin name (`gaussian`, `sqrt-primes`, `cos-atoms:7`, ...) or JSON law.
    #[arg(long, default_value = "gaussian")]
    law: String,
    /// Degrees, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = DEFAULT_R)]
    r: f64,
    /// Phases: `zero`, `random` (drawn from the seed) or a constant.
    #[arg(long, default_value = "zero")]
    phases: String,
    /// Use the law as given instead of standardizing it.
    #[arg(long)]
    raw_law: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMethod {
    SignChange,
    KacRice,
    KacRiceQuadrature,
}

#[derive(Args)]
struct CountArgs {
    /// Polynomial as JSON `{"n": .., "a": [..], "b": [..], "theta": [..]}`.
    #[arg(long, conflicts_with = "law")]
    poly: Option<PathBuf>,
    /// Otherwise sample one polynomial of degree `--n` from this law.
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = std::f64::consts::TAU, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value = "normalized")]
    mode: String,
    #[arg(long, value_enum, default_value_t = CountMethod::KacRice)]
    method: CountMethod,
    /// Kac-Rice level; defaults to `min(delta_max / 2, n^-1.3)`.
    #[arg(long)]
    delta: Option<f64>,
    /// Initial grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Gauss-Legendre points per piece for the quadrature method.
    #[arg(long, default_value_t = 16)]
    quad_points: usize,
    /// Print the located roots.
    #[arg(long)]
    roots: bool,
}

#[derive(Args)]
struct CramerArgs {
    #[arg(long, default_value = "sqrt-primes")]
    law: String,
    #[arg(long, default_value_t = 0.5)]
    b: f64,
    #[arg(long, default_value_t = 1e-3)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    t_min: f64,
    #[arg(long, default_value_t = 1e3)]
    t_max: f64,
    /// Number of windows tiling `[t_min, t_max]` (default: width 0.5).
    #[arg(long)]
    windows: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_REFINE_ITERS)]
    refine: usize,
    /// Also emit the per-window envelope and the fitted exponent.
    #[arg(long)]
    envelope: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EdgeworthMode {
    CdfCheck,
    KacFunctional,
}

#[derive(Args)]
struct EdgeworthArgs {
    #[arg(long, default_value = "sqrt-primes")]
    law: String,
    #[arg(long, default_value_t = 9)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    s: usize,
    #[arg(long, value_enum, default_value_t = EdgeworthMode::CdfCheck)]
    mode: EdgeworthMode,
    #[arg(long, default_value_t = DEFAULT_R)]
    r: f64,
    /// Point of the bivariate family, for the Kac functional.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Grid points on `[-4, 4]` for the CDF table.
    #[arg(long, default_value_t = 801)]
    points: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_UNCERTIFIED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// `Ok(false)` means the run finished but too many counts were uncertified.
fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    let out = Output { dir: cli.out_dir.clone() };
    let Some(command) = cli.command else {
        let Some(config) = cli.config else {
            bail!("give a subcommand or --config <suite.json>");
        };
        let dir = cli.out_dir.unwrap_or_else(|| PathBuf::from("."));
        let report = run_suite(
            &config,
            &dir,
            &SuiteOverrides {
                seed: cli.seed,
                workers: cli.workers,
            },
        )
        .with_context(|| format!("running suite {}", config.display()))?;
        for f in &report.files {
            eprintln!("wrote {}", f.display());
        }
        return Ok(!report.flagged());
    };
    if cli.config.is_some() {
        bail!("--config runs a whole suite; drop the subcommand");
    }
    match command {
        Command::Universality(args) => experiment(ExperimentKind::Universality, &args, seed, cli.workers, &out, |_| {}),
        Command::Threshold { common, theta } => {
            experiment(ExperimentKind::Threshold, &common, seed, cli.workers, &out, |c| c.theta_exponent = theta)
        }
        Command::SmallBall { common, gamma, t } => experiment(ExperimentKind::SmallBall, &common, seed, cli.workers, &out, |c| {
            c.gamma = gamma;
            c.t = t;
        }),
        Command::CountZeros(args) => count_zeros(&args, seed, &out),
        Command::CramerProbe(args) => in_pool(cli.workers, || cramer_probe(&args, &out)),
        Command::Edgeworth(args) => edgeworth(&args, &out),
        Command::GaussianExact { n, a, b, r, gamma } => gaussian_exact(&n, a, b, r, gamma, &out),
    }
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    /// Writes `stem.csv` and `stem.json` into the output directory, or
    /// prints the CSV (or the JSON when there is no table) to stdout.
    fn emit(&self, stem: &str, csv: Option<&str>, report: &serde_json::Value) -> Result<()> {
        let mut json = serde_json::to_string_pretty(report)?;
        json.push('\n');
        match &self.dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                if let Some(csv) = csv {
                    write(&dir.join(format!("{stem}.csv")), csv)?;
                }
                write(&dir.join(format!("{stem}.json")), &json)?;
            }
            None => print!("{}", csv.unwrap_or(&json)),
        }
        Ok(())
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn in_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn parse_law(s: &str) -> Result<CoefficientLaw> {
    CoefficientLaw::parse(s).with_context(|| format!("parsing law {s:?}"))
}

fn parse_phases(s: &str, seed: u64) -> Result<PhasePolicy> {
    Ok(match s {
        "zero" => PhasePolicy::Zero,
        "random" => PhasePolicy::UniformRandom(seed),
        other => PhasePolicy::Constant(other.parse().with_context(|| format!("bad phase policy {other:?}"))?),
    })
}

fn experiment(
    kind: ExperimentKind,
    args: &ExperimentArgs,
    seed: u64,
    workers: Option<usize>,
    out: &Output,
    tweak: impl FnOnce(&mut ExperimentConfig),
) -> Result<bool> {
    let mut cfg = ExperimentConfig::new(kind, parse_law(&args.law)?, args.n.clone());
    cfg.standardize = !args.raw_law;
    cfg.trials = args.trials;
    cfg.interval = [args.a, args.b];
    cfg.r = args.r;
    cfg.phases = parse_phases(&args.phases, seed)?;
    cfg.seed = Some(seed);
    cfg.workers = workers;
    tweak(&mut cfg);
    let report = run_experiment(&cfg)?;
    out.emit(kind.name(), Some(&report.to_csv()?), &serde_json::to_value(&report)?)?;
    Ok(!report.flagged)
}

fn count_zeros(args: &CountArgs, seed: u64, out: &Output) -> Result<bool> {
    let poly: Poly = match (&args.poly, &args.law) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let rec: PolyRecord = serde_json::from_str(&text)?;
            Poly::try_from(rec)?
        }
        (None, Some(law)) => {
            let n = args.n.context("--law needs --n")?;
            sample_polynomial(&parse_law(law)?, n, &PhasePolicy::Zero, &mut DrawStream::for_trial(seed, n, 0))?
        }
        (None, None) => bail!("give --poly <file> or --law <law> --n <degree>"),
    };
    let mode: Mode = args.mode.parse()?;
    let m = args.grid.unwrap_or_else(|| default_grid(&poly, args.a, args.b, mode));
    let zc = ZeroCounter::new(&poly, args.a, args.b, mode, m)?;
    let threshold = zc.threshold();
    let mut count = match args.method {
        CountMethod::SignChange => zc.sign_changes(true),
        CountMethod::KacRice | CountMethod::KacRiceQuadrature => {
            let delta = args.delta.unwrap_or_else(|| threshold.default_delta(poly.degree()));
            if args.delta.is_none() && !(threshold.delta_max > 0.0) {
                log::warn!("threshold is zero; Kac-Rice count cannot be certified");
            }
            zc.kac_rice(delta, &threshold)
        }
    };
    let quadrature = match args.method {
        CountMethod::KacRiceQuadrature => Some(zc.kac_rice_quadrature(count.delta.expect("kac-rice sets delta"), args.quad_points)),
        _ => None,
    };
    if matches!(args.method, CountMethod::KacRiceQuadrature) {
        count.method = Method::KacRiceQuadrature;
    }
    if !args.roots {
        count.roots = None;
    }
    let mut csv = String::from("count,method,certified,lo,hi,delta,quadrature\n");
    csv.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        count.count,
        serde_json::to_value(count.method)?.as_str().unwrap_or_default(),
        count.certified,
        count.interval.0,
        count.interval.1,
        count.delta.map(|d| d.to_string()).unwrap_or_default(),
        quadrature.map(|q| q.to_string()).unwrap_or_default()
    ));
    let report = json!({ "count": count, "threshold": threshold, "quadrature": quadrature, "degree": poly.degree() });
    out.emit("count-zeros", if args.roots { None } else { Some(&csv) }, &report)?;
    Ok(count.certified)
}

fn cramer_probe(args: &CramerArgs, out: &Output) -> Result<bool> {
    let law = parse_law(&args.law)?;
    let width = match args.windows {
        Some(0) => bail!("--windows must be positive"),
        Some(w) => (args.t_max - args.t_min) / w as f64,
        None => DEFAULT_WINDOW,
    };
    let cert = probe_weak_cramer_with(&law, args.b, args.c, args.t_min, args.t_max, width, args.refine)?;
    let mut report = json!({ "law": law.label(), "certificate": cert });
    let csv = if args.envelope {
        let env = envelope(&law, args.t_min, args.t_max, width, args.refine)?;
        match fit_cramer_exponent(&env) {
            Ok(fit) => report["fit"] = serde_json::to_value(fit)?,
            Err(e) => report["fit_error"] = json!(e.to_string()),
        }
        Some(env.to_csv())
    } else {
        None
    };
    let csv = csv.unwrap_or_else(|| {
        format!(
            "law,b,c,t_min,t_max,verdict,worst_t,worst_margin\n{},{},{},{},{},{:?},{},{}\n",
            law.label(),
            cert.b,
            cert.c,
            cert.r,
            cert.t_max,
            cert.verdict,
            cert.worst_t,
            cert.worst_margin
        )
    });
    out.emit("cramer-probe", Some(&csv), &report)?;
    Ok(true)
}

fn edgeworth(args: &EdgeworthArgs, out: &Output) -> Result<bool> {
    let law = parse_law(&args.law)?.standardize()?;
    match args.mode {
        EdgeworthMode::CdfCheck => {
            let atoms = law.discrete_atoms().context("cdf-check needs an atomic law")?;
            let oracle = exact_sum_cdf_oracle(&atoms, args.n)?;
            let table = average_cumulants(std::slice::from_ref(&law), args.s.max(3))?;
            let row = rtpz::harness::edgeworth_row(&law, args.n, args.s)?;
            let mut csv = String::from("x,oracle,gaussian,edgeworth\n");
            let pts = args.points.max(2);
            for j in 0..pts {
                let x = -4.0 + 8.0 * j as f64 / (pts - 1) as f64;
                csv.push_str(&format!("{x},{},{},{}\n", oracle.cdf(x), normal_cdf(x), edgeworth_cdf_1d(&table, args.n, args.s, x)?));
            }
            out.emit("edgeworth", Some(&csv), &json!({ "law": law.label(), "kolmogorov": row }))?;
        }
        EdgeworthMode::KacFunctional => {
            let fam = MixingFamily::with_zero_phases(law.clone(), args.n, args.t);
            let table = average_cumulants_bivariate(&fam, 4)?;
            let values: Vec<f64> = (0..=2)
                .map(|l| edgeworth_kac_functional(&table, args.n, args.r, l))
                .collect::<rtpz::Result<_>>()?;
            let gaussian = gaussian_kac_functional(args.n, args.r);
            let report = json!({
                "law": law.label(),
                "n": args.n,
                "r": args.r,
                "t": args.t,
                "l0": values[0],
                "l1": values[1],
                "l2": values[2],
                "gaussian": gaussian,
                "limit": rtpz::gaussian_reference::KAC_LIMIT,
            });
            out.emit("edgeworth-kac", None, &report)?;
        }
    }
    Ok(true)
}

fn gaussian_exact(ns: &[usize], a: f64, b: f64, r: f64, gamma: f64, out: &Output) -> Result<bool> {
    if !(a < b) {
        bail!("need a < b");
    }
    let mut csv = String::from("n,sigma2,expected_zeros,expected_per_n,kac_functional,small_ball\n");
    let mut rows = Vec::new();
    for &n in ns {
        if n == 0 {
            bail!("degrees must be at least 1");
        }
        let nf = n as f64;
        let s2 = sigma_n2(n);
        let e = exact_expected_zeros(n, a, b);
        let k = gaussian_kac_functional(n, r);
        let sb = gaussian_small_ball(s2.sqrt(), nf.powf(-gamma))?;
        csv.push_str(&format!("{n},{s2},{e},{},{k},{sb}\n", e / nf));
        rows.push(json!({ "n": n, "sigma2": s2, "expected_zeros": e, "expected_per_n": e / nf, "kac_functional": k, "small_ball": sb }));
    }
    out.emit("gaussian-exact", Some(&csv), &json!({ "interval": [a, b], "r": r, "gamma": gamma, "rows": rows }))?;
    Ok(true)
}
