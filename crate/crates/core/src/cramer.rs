//! Numerical probes of the weak Cramér condition `|phi(t)| <= 1 - C / |t|^b`.
//!
//! All scans are finite: a passing certificate only speaks about the scanned
//! range `[R, T_max]`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{CoefficientLaw, DiscreteAtoms};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_T_MAX: f64 = 1e4;
pub const DEFAULT_REFINE_ITERS: usize = 40;
/// Default window width used by [`probe_weak_cramer`].
pub const DEFAULT_WINDOW: f64 = 0.5;
const GRID_PER_WINDOW: usize = 64;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CramerCertificate {
    pub b: f64,
    pub c: f64,
    pub r: f64,
    pub t_max: f64,
    pub verdict: Verdict,
    pub worst_t: f64,
    /// Minimum over the scan of `(1 - |phi(t)|) |t|^b - C`.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeTable {
    pub centers: Vec<f64>,
    pub half_width: f64,
    pub sups: Vec<f64>,
    pub argmax: Vec<f64>,
}

impl EnvelopeTable {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("window_center,sup_abs_phi,argmax_t\n");
        for i in 0..self.len() {
            out.push_str(&format!("{},{},{}\n", self.centers[i], self.sups[i], self.argmax[i]));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CramerFit {
    pub b_hat: f64,
    pub c_hat: f64,
    pub residual: f64,
}

/// Maximizes `f` on `[lo, hi]` by a dense grid followed by golden-section
/// search around the best grid point. Returns `(argmax, max)`.
fn grid_golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, refine_iters: usize) -> (f64, f64) {
    let step = (hi - lo) / GRID_PER_WINDOW as f64;
    let (mut best_t, mut best) = (lo, f(lo));
    for j in 1..=GRID_PER_WINDOW {
        let t = if j == GRID_PER_WINDOW { hi } else { lo + j as f64 * step };
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let mut a = (best_t - step).max(lo);
    let mut b = (best_t + step).min(hi);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..refine_iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        }
        if f1 > best {
            best = f1;
            best_t = x1;
        }
        if f2 > best {
            best = f2;
            best_t = x2;
        }
    }
    (best_t, best)
}

fn windows(r: f64, t_max: f64, window: f64) -> Result<(usize, f64)> {
    if !(r > 0.0 && r < t_max && t_max.is_finite()) {
        return Err(invalid(format!("need 0 < R < T_max, got R={r}, T_max={t_max}")));
    }
    if !(window > 0.0) {
        return Err(invalid(format!("window width must be positive, got {window}")));
    }
    let count = ((t_max - r) / window).ceil().max(1.0) as usize;
    Ok((count, (t_max - r) / count as f64))
}

/// Refined per-window suprema of `|phi|` over windows tiling `[r, t_max]`.
/// The windows all share the width `(t_max - r) / ceil((t_max - r) / window)`.
pub fn envelope(
    law: &CoefficientLaw,
    r: f64,
    t_max: f64,
    window: f64,
    refine_iters: usize,
) -> Result<EnvelopeTable> {
    let (count, width) = windows(r, t_max, window)?;
    let rows: Vec<(f64, f64, f64)> = (0..count)
        .into_par_iter()
        .map(|w| {
            let lo = r + w as f64 * width;
            let hi = if w + 1 == count { t_max } else { lo + width };
            let (t, s) = grid_golden_max(|t| law.abs_char_fn(t), lo, hi, refine_iters);
            (0.5 * (lo + hi), s, t)
        })
        .collect();
    Ok(EnvelopeTable {
        centers: rows.iter().map(|x| x.0).collect(),
        half_width: 0.5 * width,
        sups: rows.iter().map(|x| x.1).collect(),
        argmax: rows.iter().map(|x| x.2).collect(),
    })
}

/// Checks `|phi(t)| <= 1 - C/|t|^b` on `[r, t_max]` with the default scan.
pub fn probe_weak_cramer(law: &CoefficientLaw, b: f64, c: f64, r: f64, t_max: f64) -> Result<CramerCertificate> {
    probe_weak_cramer_with(law, b, c, r, t_max, DEFAULT_WINDOW, DEFAULT_REFINE_ITERS)
}

/// As [`probe_weak_cramer`] with an explicit window width and refinement
/// depth. Each window is scanned for the minimum of the margin
/// `(1 - |phi(t)|) t^b - C` directly.
pub fn probe_weak_cramer_with(
    law: &CoefficientLaw,
    b: f64,
    c: f64,
    r: f64,
    t_max: f64,
    window: f64,
    refine_iters: usize,
) -> Result<CramerCertificate> {
    if !(b > 0.0 && c > 0.0) {
        return Err(invalid(format!("need b > 0 and C > 0, got b={b}, C={c}")));
    }
    let (count, width) = windows(r, t_max, window)?;
    let margin = |t: f64| (1.0 - law.abs_char_fn(t)) * t.powf(b) - c;
    let per_window: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|w| {
            let lo = r + w as f64 * width;
            let hi = if w + 1 == count { t_max } else { lo + width };
            let (t, neg) = grid_golden_max(|t| -margin(t), lo, hi, refine_iters);
            (t, -neg)
        })
        .collect();
    let (worst_t, worst_margin) = per_window
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    Ok(CramerCertificate {
        b,
        c,
        r,
        t_max,
        verdict: if worst_margin >= 0.0 { Verdict::Pass } else { Verdict::Fail },
        worst_t,
        worst_margin,
    })
}

/// Least-squares fit of `log(1 - sup|phi|) = log C - b log t` over the
/// window argmax points whose supremum is below one.
pub fn fit_cramer_exponent(env: &EnvelopeTable) -> Result<CramerFit> {
    let pts: Vec<(f64, f64)> = env
        .argmax
        .iter()
        .zip(&env.sups)
        .filter(|(_, &s)| s < 1.0)
        .map(|(&t, &s)| (t.ln(), (1.0 - s).ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::FlatEnvelope(format!(
            "only {} windows have sup |phi| < 1, need 8",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::FlatEnvelope("all window argmax points coincide".into()));
    }
    let spread = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        - pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if syy == 0.0 || spread == 0.0 {
        return Err(Error::FlatEnvelope("all window suprema are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(CramerFit {
        b_hat: -slope,
        c_hat: intercept.exp(),
        residual: (rss / m).sqrt(),
    })
}

fn dist_to_2pi_z(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    (x - two_pi * (x / two_pi).round()).abs()
}

/// Lower bound `(c_min^2 / pi^2) sum_{j>=2} dist^2(t (U_1 - U_j), 2 pi Z)` on
/// `1 - |phi(t)|` for an atomic law with atoms `U_j` and minimal weight `c_min`.
pub fn lattice_distance_lower_bound(law: &DiscreteAtoms, t: f64) -> Result<f64> {
    if law.len() < 2 {
        return Err(Error::DegenerateLaw("need at least two atoms".into()));
    }
    let u1 = law.atoms()[0];
    let c_min = law.min_weight();
    let s: f64 = law.atoms()[1..]
        .iter()
        .map(|&u| dist_to_2pi_z(t * (u1 - u)).powi(2))
        .sum();
    Ok(c_min * c_min / (PI * PI) * s)
}

/// A triangular array of independent random vectors `X_{1,n}, ..., X_{n,n}`
/// described through `(1/n) sum_i |phi_{X_{i,n}}(s)|`.
pub trait CharFamily: Sync {
    fn dim(&self) -> usize;
    fn mean_abs_char_fn(&self, s: &[f64]) -> f64;
}

impl CharFamily for CoefficientLaw {
    fn dim(&self) -> usize {
        1
    }

    fn mean_abs_char_fn(&self, s: &[f64]) -> f64 {
        self.abs_char_fn(s[0])
    }
}

impl CharFamily for [CoefficientLaw] {
    fn dim(&self) -> usize {
        1
    }

    fn mean_abs_char_fn(&self, s: &[f64]) -> f64 {
        mean_envelope(self, s[0])
    }
}

impl CharFamily for Vec<CoefficientLaw> {
    fn dim(&self) -> usize {
        1
    }

    fn mean_abs_char_fn(&self, s: &[f64]) -> f64 {
        mean_envelope(self, s[0])
    }
}

/// Arithmetic mean of `|phi_i(t)|`.
pub fn mean_envelope(laws: &[CoefficientLaw], t: f64) -> f64 {
    assert!(!laws.is_empty(), "mean_envelope needs at least one law");
    laws.iter().map(|l| l.abs_char_fn(t)).sum::<f64>() / laws.len() as f64
}

/// The bivariate family `X_{i,n}(t) = M_i (a_i, b_i)` with
/// `M_i = [[cos g, sin g], [-(i/n) sin g, (i/n) cos g]]`, `g = i t / n + theta_i`,
/// so that `(X_{i,n})_1 = u_n`-summand and `(X_{i,n})_2` its rescaled derivative.
#[derive(Debug, Clone)]
pub struct MixingFamily {
    pub law: CoefficientLaw,
    pub n: usize,
    pub t: f64,
    pub phases: Vec<f64>,
}

impl MixingFamily {
    pub fn new(law: CoefficientLaw, n: usize, t: f64, phases: Vec<f64>) -> Self {
        assert_eq!(phases.len(), n, "one phase per summand");
        Self { law, n, t, phases }
    }

    pub fn with_zero_phases(law: CoefficientLaw, n: usize, t: f64) -> Self {
        Self::new(law, n, t, vec![0.0; n])
    }

    /// The 2x2 matrix of summand `i` (1-based), row major.
    pub fn matrix(&self, i: usize) -> [[f64; 2]; 2] {
        let x = i as f64 / self.n as f64;
        let (s, c) = (i as f64 * self.t / self.n as f64 + self.phases[i - 1]).sin_cos();
        [[c, s], [-x * s, x * c]]
    }

    /// `|phi_{X_{i,n}}(s)| = |phi(alpha)| |phi(beta)|` with `(alpha, beta) = M_i^T s`.
    pub fn abs_char_fn(&self, i: usize, s: [f64; 2]) -> f64 {
        let m = self.matrix(i);
        let alpha = m[0][0] * s[0] + m[1][0] * s[1];
        let beta = m[0][1] * s[0] + m[1][1] * s[1];
        self.law.abs_char_fn(alpha) * self.law.abs_char_fn(beta)
    }
}

impl CharFamily for MixingFamily {
    fn dim(&self) -> usize {
        2
    }

    fn mean_abs_char_fn(&self, s: &[f64]) -> f64 {
        let s = [s[0], s[1]];
        (1..=self.n).map(|i| self.abs_char_fn(i, s)).sum::<f64>() / self.n as f64
    }
}

/// Grid estimate of `sup_{r <= |u| <= R} (1/n) sum_i |phi_i(u)|`.
///
/// One-dimensional families are scanned on `grid` points of `[r, R]` (the
/// modulus is even) and refined by golden section; two-dimensional ones on a
/// polar `grid x grid` mesh over a half-annulus.
pub fn local_cramer_sup<F: CharFamily + ?Sized>(family: &F, r: f64, big_r: f64, grid: usize) -> Result<f64> {
    if !(r > 0.0 && r < big_r) {
        return Err(invalid(format!("need 0 < r < R, got r={r}, R={big_r}")));
    }
    let grid = grid.max(2);
    match family.dim() {
        1 => {
            let step = (big_r - r) / (grid - 1) as f64;
            let best = (0..grid)
                .into_par_iter()
                .map(|j| {
                    let lo = (r + (j as f64 - 1.0) * step).max(r);
                    let hi = (r + (j as f64 + 1.0) * step).min(big_r);
                    let centre = r + j as f64 * step;
                    let at_centre = family.mean_abs_char_fn(&[centre]);
                    let (_, refined) = golden_max(|t| family.mean_abs_char_fn(&[t]), lo, hi, 30);
                    at_centre.max(refined)
                })
                .reduce(|| 0.0, f64::max);
            Ok(best)
        }
        2 => {
            let best = (0..grid)
                .into_par_iter()
                .map(|j| {
                    let rho = r + (big_r - r) * j as f64 / (grid - 1) as f64;
                    (0..grid)
                        .map(|k| {
                            let ang = PI * k as f64 / grid as f64;
                            family.mean_abs_char_fn(&[rho * ang.cos(), rho * ang.sin()])
                        })
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max);
            Ok(best)
        }
        d => Err(invalid(format!("unsupported dimension {d}"))),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_rademacher, make_sqrt_primes};

    fn near_multiple_of(x: f64, period: f64, tol: f64) -> bool {
        let k = (x / period).round();
        k >= 1.0 && (x - k * period).abs() < tol
    }

    #[test]
    fn rademacher_envelope_hits_one_at_resonances() {
        let env = envelope(&make_rademacher(), 1.0, 100.0, 1.0, DEFAULT_REFINE_ITERS).unwrap();
        assert_eq!(env.len(), 99);
        for i in 0..env.len() {
            let (lo, hi) = (env.centers[i] - env.half_width, env.centers[i] + env.half_width);
            let k = (lo / (2.0 * PI)).ceil();
            if k * 2.0 * PI <= hi {
                assert!(env.sups[i] >= 1.0 - 1e-8, "window {i}");
            }
            assert!(env.sups[i] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn gaussian_envelope_below_exp_half() {
        let env = envelope(&CoefficientLaw::standard_gaussian(), 1.0, 20.0, 0.5, 40).unwrap();
        assert!(env.sups.iter().all(|&s| s <= (-0.5f64).exp() + 1e-15));
        assert!((env.sups[0] - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn sqrt_primes_envelope_below_one() {
        let env = envelope(&make_sqrt_primes(), 5.0, 500.0, 1.0, 40).unwrap();
        assert!(env.sups.iter().all(|&s| s < 1.0));
        let fit = fit_cramer_exponent(&env).unwrap();
        assert!(fit.b_hat.is_finite() && fit.c_hat > 0.0);
    }

    #[test]
    fn probe_examples() {
        let cert = probe_weak_cramer(&make_rademacher(), 1.0, 0.01, 1.0, 100.0).unwrap();
        assert_eq!(cert.verdict, Verdict::Fail);
        // |cos t| = 1 at every multiple of pi, so the first offender is pi or 2 pi
        assert!(near_multiple_of(cert.worst_t, PI, 1e-6), "worst_t = {}", cert.worst_t);
        assert!(cert.worst_t < 2.0 * PI + 1e-6);
        assert!((cert.worst_margin + 0.01).abs() < 1e-9);

        let cert = probe_weak_cramer(&CoefficientLaw::standard_gaussian(), 1.0, 0.5, 2.0, 50.0).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert!(cert.worst_margin >= 0.0);
        // the margin is smallest at the onset
        assert!((cert.worst_margin - ((1.0 - (-2.0f64).exp()) * 2.0 - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn sqrt_primes_probe_consistent_with_fit() {
        let law = make_sqrt_primes();
        let env = envelope(&law, 5.0, 500.0, 1.0, 40).unwrap();
        let fit = fit_cramer_exponent(&env).unwrap();
        let cert = probe_weak_cramer(&law, 0.9, fit.c_hat, 5.0, 500.0).unwrap();
        assert_eq!(cert.verdict == Verdict::Pass, cert.worst_margin >= 0.0);
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let (b, c) = (1.0, 0.3);
        let argmax: Vec<f64> = (0..20).map(|i| 5.0 + 10.0 * i as f64).collect();
        let env = EnvelopeTable {
            centers: argmax.clone(),
            half_width: 5.0,
            sups: argmax.iter().map(|t| 1.0 - c / t.powf(b)).collect(),
            argmax,
        };
        let fit = fit_cramer_exponent(&env).unwrap();
        assert!((fit.b_hat - b).abs() < 1e-9);
        assert!((fit.c_hat - c).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_gaussian_is_super_polynomial() {
        let env = envelope(&CoefficientLaw::standard_gaussian(), 5.0, 50.0, 1.0, 40).unwrap();
        let fit = fit_cramer_exponent(&env).unwrap();
        assert!(fit.b_hat.abs() < 1e-4, "b_hat = {}", fit.b_hat);
    }

    #[test]
    fn fit_flat_envelope_errors() {
        let env = EnvelopeTable {
            centers: vec![1.0; 10],
            half_width: 0.5,
            sups: vec![1.0; 10],
            argmax: (1..=10).map(|i| i as f64).collect(),
        };
        assert!(matches!(fit_cramer_exponent(&env), Err(Error::FlatEnvelope(_))));
        let env = EnvelopeTable {
            sups: vec![0.5; 10],
            ..env
        };
        assert!(matches!(fit_cramer_exponent(&env), Err(Error::FlatEnvelope(_))));
    }

    #[test]
    fn rademacher_fit_is_flagged() {
        let env = envelope(&make_rademacher(), 1.0, 100.0, 1.0, 40).unwrap();
        match fit_cramer_exponent(&env) {
            Err(Error::FlatEnvelope(_)) => {}
            Ok(fit) => assert!(fit.residual > 1.0, "residual {}", fit.residual),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn lattice_bound_examples() {
        let rad = make_rademacher().discrete_atoms().unwrap();
        let v = lattice_distance_lower_bound(&rad, PI / 2.0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        assert!(1.0 - make_rademacher().abs_char_fn(PI / 2.0) >= v);
        assert_eq!(lattice_distance_lower_bound(&rad, 0.0).unwrap(), 0.0);
        assert!(lattice_distance_lower_bound(&rad, 2.0 * PI).unwrap() < 1e-28);
        let point = CoefficientLaw::discrete(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            lattice_distance_lower_bound(&point.discrete_atoms().unwrap(), 1.0),
            Err(Error::DegenerateLaw(_))
        ));
    }

    #[test]
    fn mean_envelope_examples() {
        let law = make_sqrt_primes();
        let copies = vec![law.clone(); 7];
        assert!((mean_envelope(&copies, 3.3) - law.abs_char_fn(3.3)).abs() < 1e-15);

        let n = 100;
        let scaled: Vec<CoefficientLaw> = (1..=n)
            .map(|i| CoefficientLaw::affine(make_rademacher(), 0.0, i as f64 / n as f64).unwrap())
            .collect();
        assert!(mean_envelope(&scaled, 2.0 * PI) < 1.0);
    }

    #[test]
    fn mixing_family_matches_direct_expectation() {
        // |phi_X(s)| computed from the atoms of (X_1, X_2) directly
        let fam = MixingFamily::new(make_rademacher(), 5, 1.3, vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        let s = [0.7, -2.1];
        let m = fam.matrix(3);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                let x1 = m[0][0] * a + m[0][1] * b;
                let x2 = m[1][0] * a + m[1][1] * b;
                acc += num_complex::Complex64::from_polar(0.25, s[0] * x1 + s[1] * x2);
            }
        }
        assert!((acc.norm() - fam.abs_char_fn(3, s)).abs() < 1e-14);
    }

    #[test]
    fn mixing_family_mean_cramer_bound() {
        let law = make_sqrt_primes();
        let b = 1.0;
        // K: the smallest value of (1 - |phi(u)|) u^b over the range the
        // rotated arguments can reach when |s| = 10 and i/n >= 1/2
        let cert = probe_weak_cramer(&law, b, 1e-300, 5.0 / 2f64.sqrt(), 10.0).unwrap();
        let k = cert.worst_margin;
        assert!(k > 0.0);
        let n = 200;
        let fam = MixingFamily::with_zero_phases(law, n, 0.7);
        for ang in [0.0, 0.4, 1.3, 2.2, 3.0] {
            let s = [10.0 * f64::cos(ang), 10.0 * f64::sin(ang)];
            let v = fam.mean_abs_char_fn(&s);
            assert!(v <= 1.0 - k / (2.0 * 10f64.powf(b)), "angle {ang}: {v}");
        }
    }

    #[test]
    fn local_sup_examples() {
        let g = CoefficientLaw::standard_gaussian();
        let v = local_cramer_sup(&g, 1.0, 5.0, 200).unwrap();
        assert!((v - 0.606_530_7).abs() < 1e-7);
        let v = local_cramer_sup(&make_rademacher(), 5.0, 8.0, 200).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        let v = local_cramer_sup(&make_sqrt_primes(), 1.0, 50.0, 2000).unwrap();
        assert!(v < 1.0);
        let fam = MixingFamily::with_zero_phases(make_sqrt_primes(), 50, 0.0);
        let v = local_cramer_sup(&fam, 1.0, 5.0, 40).unwrap();
        assert!(v < 1.0);
    }
}
