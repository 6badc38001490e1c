//! Experiment configs, deterministic parallel drivers and report files.
//!
//! Trial `j` at degree `n` always draws from the stream `(seed, n, j)` and
//! per-trial results are collected in index order before any reduction, so
//! a report depends on the config and seed only, never on the worker count.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::cramer::{probe_weak_cramer, Verdict};
use crate::distributions::CoefficientLaw;
use crate::edgeworth::{average_cumulants, edgeworth_cdf_1d, exact_sum_cdf_oracle, kolmogorov_distance, oracle_probes, ContinuousCdf};
use crate::error::{invalid, Error, Result};
use crate::gaussian_reference::{exact_expected_zeros, gaussian_small_ball, sigma_n2};
use crate::rng::DrawStream;
use crate::smallball::{fit_decay_exponent, small_ball_mc_with_phases, DecayFit};
use crate::special::normal_cdf;
use crate::trigpoly::{Mode, PhasePolicy, Poly, PolySampler};
use crate::zeros::{default_grid, ZeroCounter};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_R: f64 = 1.3;
pub const DEFAULT_THETA_EXPONENT: f64 = -1.25;
/// Largest tolerated fraction of trials left uncertified after the retry.
pub const MAX_UNCERTIFIED_FRACTION: f64 = 0.01;
const ORACLE_GRID: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Universality,
    Threshold,
    SmallBall,
    Cramer,
    Edgeworth,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Universality => "universality",
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::SmallBall => "small-ball",
            ExperimentKind::Cramer => "cramer",
            ExperimentKind::Edgeworth => "edgeworth",
        }
    }
}

fn law_from_json<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CoefficientLaw, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Spec {
        Name(String),
        Full(CoefficientLaw),
    }
    match Spec::deserialize(d)? {
        Spec::Name(s) => CoefficientLaw::from_name(&s).map_err(serde::de::Error::custom),
        Spec::Full(l) => Ok(l),
    }
}

fn default_interval() -> [f64; 2] {
    [0.0, TAU]
}
fn default_trials() -> u64 {
    1000
}
fn default_r() -> f64 {
    DEFAULT_R
}
fn default_theta_exponent() -> f64 {
    DEFAULT_THETA_EXPONENT
}
fn default_gamma() -> f64 {
    0.6
}
fn default_t() -> f64 {
    1.0
}
fn default_s() -> usize {
    3
}
fn default_b() -> f64 {
    0.5
}
fn default_c() -> f64 {
    1e-3
}
fn default_t_min() -> f64 {
    1.0
}
fn default_t_max() -> f64 {
    crate::cramer::DEFAULT_T_MAX
}
fn default_true() -> bool {
    true
}

/// One experiment. Only the fields relevant to `kind` are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(deserialize_with = "law_from_json")]
    pub law: CoefficientLaw,
    /// Replace the law by its affine standardization first.
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Interval `[a, b]` in the original variable.
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Falls back to the suite seed.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default)]
    pub phases: PhasePolicy,
    /// Not part of the config hash: the output does not depend on it.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    #[serde(default = "default_theta_exponent")]
    pub theta_exponent: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, law: CoefficientLaw, n_list: Vec<usize>) -> Self {
        Self {
            kind,
            law,
            standardize: true,
            n_list,
            interval: default_interval(),
            trials: default_trials(),
            seed: None,
            r: DEFAULT_R,
            phases: PhasePolicy::Zero,
            workers: None,
            theta_exponent: DEFAULT_THETA_EXPONENT,
            gamma: default_gamma(),
            t: default_t(),
            s: default_s(),
            b: default_b(),
            c: default_c(),
            t_min: default_t_min(),
            t_max: default_t_max(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        let [a, b] = self.interval;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("interval must satisfy lo < hi, got [{a}, {b}]")));
        }
        if !(self.r > 1.2 && self.r < 1.5) {
            return Err(invalid(format!("r must lie in (1.2, 1.5), got {}", self.r)));
        }
        if self.kind != ExperimentKind::Cramer {
            if self.n_list.is_empty() {
                return Err(invalid("n_list is empty"));
            }
            if self.n_list.contains(&0) {
                return Err(invalid("degrees must be at least 1"));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, with the resolved seed.
    pub fn hash(&self, seed: u64) -> String {
        let mut c = self.clone();
        c.seed = Some(seed);
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn resolved_law(&self) -> Result<CoefficientLaw> {
        if self.standardize {
            self.law.standardize()
        } else {
            Ok(self.law.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityRow {
    pub n: usize,
    pub trials: u64,
    pub mean_count: f64,
    pub se: f64,
    pub mean_per_n: f64,
    pub reference_count: f64,
    pub reference_per_n: f64,
    pub limit_per_n: f64,
    pub certified_fraction: f64,
    pub mismatches: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub n: usize,
    pub trials: u64,
    pub theta: f64,
    pub level: f64,
    pub below: u64,
    pub frequency: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallRow {
    pub n: usize,
    pub gamma: f64,
    pub t: f64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub se: f64,
    pub gaussian_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CramerRow {
    pub b: f64,
    pub c: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub verdict: Verdict,
    pub worst_t: f64,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeworthRow {
    pub n: usize,
    pub s: usize,
    pub atoms: usize,
    pub dist_gaussian: f64,
    pub dist_edgeworth: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Rows {
    Universality(Vec<UniversalityRow>),
    Threshold(Vec<ThresholdRow>),
    SmallBall(Vec<SmallBallRow>),
    Cramer(Vec<CramerRow>),
    Edgeworth(Vec<EdgeworthRow>),
}

fn rows_csv<R: Serialize>(rows: &[R], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> Error {
    invalid(format!("csv: {e}"))
}

impl Rows {
    /// Header row plus one line per row, LF terminated.
    pub fn to_csv(&self) -> Result<String> {
        match self {
            Rows::Universality(r) => rows_csv(
                r,
                &[
                    "n",
                    "trials",
                    "mean_count",
                    "se",
                    "mean_per_n",
                    "reference_count",
                    "reference_per_n",
                    "limit_per_n",
                    "certified_fraction",
                    "mismatches",
                ],
            ),
            Rows::Threshold(r) => rows_csv(r, &["n", "trials", "theta", "level", "below", "frequency", "se"]),
            Rows::SmallBall(r) => rows_csv(r, &["n", "gamma", "t", "trials", "hits", "estimate", "se", "gaussian_reference"]),
            Rows::Cramer(r) => rows_csv(r, &["b", "c", "t_min", "t_max", "verdict", "worst_t", "worst_margin"]),
            Rows::Edgeworth(r) => rows_csv(r, &["n", "s", "atoms", "dist_gaussian", "dist_edgeworth", "ratio"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub law: String,
    pub rows: Rows,
    /// Set when more than [`MAX_UNCERTIFIED_FRACTION`] of some row's trials
    /// stayed uncertified.
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_fit: Option<DecayFit>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> Result<String> {
        self.rows.to_csv()
    }
}

/// Result of counting the zeros of one sampled polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub count: usize,
    pub sign_changes: usize,
    pub certified: bool,
    /// Both counts certified but different.
    pub mismatch: bool,
    pub omega_lower: f64,
    pub delta: f64,
    pub retried: bool,
}

/// Counts zeros of `poly` on `[a n, b n]` in the rescaled variable with
/// Kac-Rice at `delta = min(delta_max / 2, n^-r)`, cross-checked against
/// certified sign changes. An uncertified attempt is repeated once on a grid
/// twice as fine.
pub fn count_trial(poly: &Poly, interval: [f64; 2], r: f64) -> Result<TrialOutcome> {
    let n = poly.degree();
    let nf = n as f64;
    let (lo, hi) = (interval[0] * nf, interval[1] * nf);
    let m0 = default_grid(poly, lo, hi, Mode::Rescaled);
    let mut out = None;
    for (attempt, m) in [m0, 2 * m0 - 1].into_iter().enumerate() {
        let zc = ZeroCounter::new(poly, lo, hi, Mode::Rescaled, m)?;
        let report = zc.threshold();
        let cap = nf.powf(-r);
        let delta = if report.delta_max > 0.0 { (0.5 * report.delta_max).min(cap) } else { cap };
        let kr = zc.kac_rice(delta, &report);
        let sc = zc.sign_changes(false);
        let mismatch = kr.certified && sc.certified && kr.count != sc.count;
        let o = TrialOutcome {
            count: kr.count,
            sign_changes: sc.count,
            certified: kr.certified && sc.certified && !mismatch,
            mismatch,
            omega_lower: report.omega_lower,
            delta,
            retried: attempt > 0,
        };
        out = Some(o);
        if o.certified {
            break;
        }
    }
    Ok(out.expect("at least one attempt"))
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn provenance(cfg: &ExperimentConfig, seed: u64) -> Provenance {
    Provenance {
        seed,
        config_hash: cfg.hash(seed),
        version: VERSION.to_string(),
    }
}

fn seed_of(cfg: &ExperimentConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn in_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Mean zero counts per degree against the Gaussian finite-n reference.
pub fn run_universality(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let law = cfg.resolved_law()?;
    let seed = seed_of(cfg);
    let [a, b] = cfg.interval;
    let mut rows = Vec::new();
    let mut flagged = false;
    for &n in &cfg.n_list {
        let sampler = PolySampler::new(&law, n, &cfg.phases)?;
        let outcomes: Vec<TrialOutcome> = in_pool(cfg.workers, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|j| count_trial(&sampler.sample(&mut DrawStream::for_trial(seed, n, j)), cfg.interval, cfg.r))
                .collect::<Result<Vec<_>>>()
        })??;
        let counts: Vec<f64> = outcomes.iter().map(|o| o.count as f64).collect();
        let (mean, se) = mean_se(&counts);
        let certified = outcomes.iter().filter(|o| o.certified).count() as f64 / cfg.trials as f64;
        let mismatches = outcomes.iter().filter(|o| o.mismatch).count() as u64;
        if 1.0 - certified > MAX_UNCERTIFIED_FRACTION {
            log::warn!("n = {n}: {:.2}% of trials uncertified", 100.0 * (1.0 - certified));
            flagged = true;
        }
        let nf = n as f64;
        let reference = exact_expected_zeros(n, a, b);
        rows.push(UniversalityRow {
            n,
            trials: cfg.trials,
            mean_count: mean,
            se,
            mean_per_n: mean / nf,
            reference_count: reference,
            reference_per_n: reference / nf,
            limit_per_n: (b - a) / (PI * 3f64.sqrt()),
            certified_fraction: certified,
            mismatches,
        });
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Universality,
        law: law.label(),
        rows: Rows::Universality(rows),
        flagged,
        decay_fit: None,
        provenance: provenance(cfg, seed),
    })
}

/// Frequency of `{omega_lower < n^theta}` per degree. Using the certified
/// lower bound over-counts, never under-counts.
pub fn run_threshold(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let law = cfg.resolved_law()?;
    let seed = seed_of(cfg);
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let sampler = PolySampler::new(&law, n, &cfg.phases)?;
        let nf = n as f64;
        let (lo, hi) = (cfg.interval[0] * nf, cfg.interval[1] * nf);
        let level = nf.powf(cfg.theta_exponent);
        let below: Vec<bool> = in_pool(cfg.workers, || {
            (0..cfg.trials)
                .into_par_iter()
                .map(|j| {
                    let poly = sampler.sample(&mut DrawStream::for_trial(seed, n, j));
                    let zc = ZeroCounter::with_default_grid(&poly, lo, hi, Mode::Rescaled)?;
                    Ok(zc.threshold().omega_lower < level)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let hits = below.iter().filter(|b| **b).count() as u64;
        let p = hits as f64 / cfg.trials as f64;
        rows.push(ThresholdRow {
            n,
            trials: cfg.trials,
            theta: cfg.theta_exponent,
            level,
            below: hits,
            frequency: p,
            se: (p * (1.0 - p) / cfg.trials as f64).sqrt(),
        });
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::Threshold,
        law: law.label(),
        rows: Rows::Threshold(rows),
        flagged: false,
        decay_fit: None,
        provenance: provenance(cfg, seed),
    })
}

pub fn run_small_ball(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let law = cfg.resolved_law()?;
    let seed = seed_of(cfg);
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for &n in &cfg.n_list {
        let phases = cfg.phases.phases(n)?;
        let est = in_pool(cfg.workers, || small_ball_mc_with_phases(&law, n, cfg.t, cfg.gamma, cfg.trials, seed, &phases))??;
        rows.push(SmallBallRow {
            n,
            gamma: cfg.gamma,
            t: cfg.t,
            trials: est.trials,
            hits: est.hits,
            estimate: est.estimate,
            se: est.se,
            gaussian_reference: gaussian_small_ball(sigma_n2(n).sqrt(), est.radius)?,
        });
        estimates.push(est);
    }
    Ok(ExperimentReport {
        kind: ExperimentKind::SmallBall,
        law: law.label(),
        rows: Rows::SmallBall(rows),
        flagged: false,
        decay_fit: fit_decay_exponent(&estimates).ok(),
        provenance: provenance(cfg, seed),
    })
}

pub fn run_cramer(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let law = cfg.resolved_law()?;
    let cert = in_pool(cfg.workers, || probe_weak_cramer(&law, cfg.b, cfg.c, cfg.t_min, cfg.t_max))??;
    Ok(ExperimentReport {
        kind: ExperimentKind::Cramer,
        law: law.label(),
        rows: Rows::Cramer(vec![CramerRow {
            b: cert.b,
            c: cert.c,
            t_min: cert.r,
            t_max: cert.t_max,
            verdict: cert.verdict,
            worst_t: cert.worst_t,
            worst_margin: cert.worst_margin,
        }]),
        flagged: false,
        decay_fit: None,
        provenance: provenance(cfg, seed_of(cfg)),
    })
}

/// Kolmogorov distances of the exact normalized-sum law to the Gaussian and
/// to the Edgeworth expansion of order `s`.
pub fn edgeworth_row(law: &CoefficientLaw, n: usize, s: usize) -> Result<EdgeworthRow> {
    let atoms = law
        .discrete_atoms()
        .ok_or_else(|| invalid(format!("{} is not an atomic law", law.label())))?;
    let oracle = exact_sum_cdf_oracle(&atoms, n)?;
    let table = average_cumulants(std::slice::from_ref(law), s.max(3))?;
    let probes = oracle_probes(&oracle, ORACLE_GRID);
    let dist_gaussian = kolmogorov_distance(&oracle, &ContinuousCdf(normal_cdf), &probes);
    let edge = ContinuousCdf(|x| edgeworth_cdf_1d(&table, n, s, x).expect("validated table"));
    // surfaces an unsupported s as an error before the closure can panic
    edgeworth_cdf_1d(&table, n, s, 0.0)?;
    let dist_edgeworth = kolmogorov_distance(&oracle, &edge, &probes);
    Ok(EdgeworthRow {
        n,
        s,
        atoms: oracle.atoms().len(),
        dist_gaussian,
        dist_edgeworth,
        ratio: dist_edgeworth / dist_gaussian,
    })
}

pub fn run_edgeworth(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let law = cfg.resolved_law()?;
    let rows = in_pool(cfg.workers, || {
        cfg.n_list
            .par_iter()
            .map(|&n| edgeworth_row(&law, n, cfg.s))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(ExperimentReport {
        kind: ExperimentKind::Edgeworth,
        law: law.label(),
        rows: Rows::Edgeworth(rows),
        flagged: false,
        decay_fit: None,
        provenance: provenance(cfg, seed_of(cfg)),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Universality => run_universality(cfg),
        ExperimentKind::Threshold => run_threshold(cfg),
        ExperimentKind::SmallBall => run_small_ball(cfg),
        ExperimentKind::Cramer => run_cramer(cfg),
        ExperimentKind::Edgeworth => run_edgeworth(cfg),
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOverrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub version: String,
    pub reports: Vec<ExperimentReport>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl SuiteReport {
    pub fn flagged(&self) -> bool {
        self.reports.iter().any(|r| r.flagged)
    }
}

/// Runs every experiment of a suite, in order, writing
/// `NN_<kind>.csv` per experiment and `report.json` into `out_dir`.
/// A `--seed` override replaces the suite seed and every per-experiment seed.
pub fn run_suite_config(mut suite: SuiteConfig, out_dir: &Path, overrides: &SuiteOverrides) -> Result<SuiteReport> {
    if let Some(s) = overrides.seed {
        suite.seed = s;
        for e in &mut suite.experiments {
            e.seed = None;
        }
    }
    if overrides.workers.is_some() {
        suite.workers = overrides.workers;
    }
    std::fs::create_dir_all(out_dir)?;
    let mut reports = Vec::with_capacity(suite.experiments.len());
    let mut files = Vec::new();
    for (i, e) in suite.experiments.iter().enumerate() {
        let mut cfg = e.clone();
        cfg.seed = Some(cfg.seed.unwrap_or(suite.seed));
        if suite.workers.is_some() {
            cfg.workers = suite.workers;
        }
        log::info!("experiment {i}: {} on {}", cfg.kind.name(), cfg.law.label());
        let report = run_experiment(&cfg)?;
        let path = out_dir.join(format!("{i:02}_{}.csv", cfg.kind.name()));
        std::fs::write(&path, report.to_csv()?)?;
        files.push(path);
        reports.push(report);
    }
    let out = SuiteReport {
        seed: suite.seed,
        version: VERSION.to_string(),
        reports,
        files,
    };
    let json_path = out_dir.join("report.json");
    let mut json = serde_json::to_string_pretty(&out)?;
    json.push('\n');
    std::fs::write(&json_path, json)?;
    let mut out = out;
    out.files.push(json_path);
    Ok(out)
}

pub fn run_suite(config_path: &Path, out_dir: &Path, overrides: &SuiteOverrides) -> Result<SuiteReport> {
    run_suite_config(SuiteConfig::load(config_path)?, out_dir, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_rademacher, make_sqrt_primes};

    fn cfg(kind: ExperimentKind, law: CoefficientLaw, n: Vec<usize>, trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind, law, n);
        c.trials = trials;
        c.seed = Some(11);
        c
    }

    #[test]
    fn config_parses_names_and_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"kind": "universality", "law": "sqrt-primes", "n_list": [10]}"#).unwrap();
        assert_eq!(c.interval, [0.0, TAU]);
        assert_eq!(c.r, 1.3);
        assert_eq!(c.theta_exponent, -1.25);
        assert_eq!(c.phases, PhasePolicy::Zero);
        let full = format!(r#"{{"kind": "threshold", "law": {}, "n_list": [5]}}"#, serde_json::to_string(&make_rademacher()).unwrap());
        let c: ExperimentConfig = serde_json::from_str(&full).unwrap();
        assert_eq!(c.law, make_rademacher());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"kind": "universality", "law": "nope"}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"kind": "universality", "law": "gaussian", "bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = cfg(ExperimentKind::Universality, CoefficientLaw::standard_gaussian(), vec![5], 1);
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
        c.trials = 1;
        c.interval = [1.0, 1.0];
        assert!(c.validate().is_err());
        c.interval = [0.0, 1.0];
        c.r = 1.6;
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_workers() {
        let mut c = cfg(ExperimentKind::Universality, make_sqrt_primes(), vec![5], 3);
        let h = c.hash(1);
        c.workers = Some(4);
        assert_eq!(c.hash(1), h);
        assert_ne!(c.hash(2), h);
        assert_eq!(h.len(), 64);
    }

    #[test]
    fn trial_counts_agree() {
        let law = make_sqrt_primes();
        for n in [10usize, 40] {
            let sampler = PolySampler::new(&law, n, &PhasePolicy::Zero).unwrap();
            for j in 0..20 {
                let p = sampler.sample(&mut DrawStream::for_trial(3, n, j));
                let o = count_trial(&p, [0.0, TAU], 1.3).unwrap();
                assert!(!o.mismatch);
                if o.certified {
                    assert_eq!(o.count, o.sign_changes);
                    assert!(o.count.is_multiple_of(2), "full period gives an even count");
                }
            }
        }
    }

    #[test]
    fn universality_gaussian_small() {
        let c = cfg(ExperimentKind::Universality, CoefficientLaw::standard_gaussian(), vec![20], 400);
        let rep = run_universality(&c).unwrap();
        let Rows::Universality(rows) = &rep.rows else { panic!() };
        let r = &rows[0];
        assert!((r.mean_count - r.reference_count).abs() < 3.0 * r.se + 0.05 * r.reference_count, "{r:?}");
        assert!(r.certified_fraction >= 0.99);
        assert_eq!(r.mismatches, 0);
        assert!(!rep.flagged);
    }

    #[test]
    fn half_interval_halves_mean() {
        let law = CoefficientLaw::standard_gaussian();
        let mut c = cfg(ExperimentKind::Universality, law, vec![30], 300);
        let full = run_universality(&c).unwrap();
        c.interval = [0.0, PI];
        let half = run_universality(&c).unwrap();
        let (Rows::Universality(f), Rows::Universality(h)) = (&full.rows, &half.rows) else { panic!() };
        let diff = (f[0].mean_count / 2.0 - h[0].mean_count).abs();
        assert!(diff < 2.0 * (f[0].se / 2.0).hypot(h[0].se) + 0.02 * h[0].mean_count, "{diff}");
    }

    #[test]
    fn threshold_degenerate_level() {
        let mut c = cfg(ExperimentKind::Threshold, CoefficientLaw::standard_gaussian(), vec![10, 20], 20);
        c.theta_exponent = 1.0;
        let rep = run_threshold(&c).unwrap();
        let Rows::Threshold(rows) = &rep.rows else { panic!() };
        assert!(rows.iter().all(|r| r.frequency == 1.0));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut c = cfg(ExperimentKind::Universality, make_sqrt_primes(), vec![12, 25], 40);
        c.workers = Some(1);
        let a = run_universality(&c).unwrap().to_csv().unwrap();
        c.workers = Some(3);
        let b = run_universality(&c).unwrap().to_csv().unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("n,trials,mean_count,se,mean_per_n,"));
        assert_eq!(a.lines().count(), 3);
    }

    #[test]
    fn edgeworth_row_improves_on_gaussian() {
        let r = edgeworth_row(&make_sqrt_primes(), 9, 3).unwrap();
        assert!(r.dist_edgeworth < r.dist_gaussian);
        let rad = edgeworth_row(&make_rademacher(), 6, 2).unwrap();
        assert_eq!(rad.ratio, 1.0);
        assert!(edgeworth_row(&CoefficientLaw::standard_gaussian(), 4, 3).is_err());
    }

    #[test]
    fn empty_suite() {
        let dir = tempfile::tempdir().unwrap();
        let rep = run_suite_config(SuiteConfig { seed: 1, workers: None, experiments: vec![] }, dir.path(), &SuiteOverrides::default()).unwrap();
        assert!(rep.reports.is_empty());
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(json["reports"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn suite_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let suite = SuiteConfig {
            seed: 5,
            workers: Some(2),
            experiments: vec![
                cfg(ExperimentKind::Threshold, make_sqrt_primes(), vec![10], 10),
                cfg(ExperimentKind::Edgeworth, make_sqrt_primes(), vec![5], 1),
            ],
        };
        let rep = run_suite_config(suite, dir.path(), &SuiteOverrides { seed: Some(9), workers: None }).unwrap();
        assert_eq!(rep.files.len(), 3);
        assert!(rep.reports.iter().all(|r| r.provenance.seed == 9));
        let csv = std::fs::read_to_string(dir.path().join("01_edgeworth.csv")).unwrap();
        assert!(csv.starts_with("n,s,atoms,dist_gaussian,dist_edgeworth,ratio\n5,3,"));
        assert!(!csv.contains('\r'));
    }
}
