//! Monte Carlo small-ball probabilities `P(|(U_n(t), U_n'(t))|_2 <= n^-gamma)`.
//!
//! `(U_n(t), U_n'(t)) = n^{-1/2} sum_i X_{i,n}(t)` with
//! `X_{i,n}(t) = (a_i cos g_i + b_i sin g_i, (i/n)(b_i cos g_i - a_i sin g_i))`
//! and `g_i = i t / n + theta_i`.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::CoefficientLaw;
use crate::error::{invalid, Error, Result};
use crate::rng::DrawStream;

pub const DEFAULT_T: f64 = 1.0;
pub const MIN_TRIALS: u64 = 10_000;
/// Tag separating small-ball streams from the zero-counting ones.
const STREAM_TAG: u64 = 0x736d_616c_6c62;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallEstimate {
    pub law: String,
    pub n: usize,
    pub t: f64,
    pub gamma: f64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub se: f64,
    pub radius: f64,
    /// One-sided 95% upper bound: the estimate itself, or `3 / trials` when
    /// there were no hits.
    pub upper_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Whether `gamma < 1/b + 1/2`, the admissible range for exponent `b`.
pub fn gamma_admissible(gamma: f64, b: f64) -> bool {
    gamma > 0.0 && gamma < 1.0 / b + 0.5
}

/// Estimates the small-ball probability at radius `n^-gamma` from `trials`
/// polynomials with zero phases. Trial `j` draws from the stream
/// `(seed, n, j)`, so the hit count does not depend on the thread count.
pub fn small_ball_mc(law: &CoefficientLaw, n: usize, t: f64, gamma: f64, trials: u64, seed: u64) -> Result<SmallBallEstimate> {
    small_ball_mc_with_phases(law, n, t, gamma, trials, seed, &vec![0.0; n])
}

pub fn small_ball_mc_with_phases(
    law: &CoefficientLaw,
    n: usize,
    t: f64,
    gamma: f64,
    trials: u64,
    seed: u64,
    phases: &[f64],
) -> Result<SmallBallEstimate> {
    if n == 0 || trials == 0 {
        return Err(invalid("need n >= 1 and at least one trial"));
    }
    if phases.len() != n {
        return Err(invalid(format!("need {n} phases, got {}", phases.len())));
    }
    if !law.is_standardized() {
        let m = law.moments(2)?;
        return Err(Error::NotStandardized {
            mean: m.mean,
            variance: m.variance,
        });
    }
    if trials < MIN_TRIALS {
        log::warn!("small-ball estimate with only {trials} trials");
    }
    let flat = law.flatten();
    let nf = n as f64;
    let (mut c1, mut s1, mut c2, mut s2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 1..=n {
        let x = i as f64 / nf;
        let (s, c) = (i as f64 * t / nf + phases[i - 1]).sin_cos();
        c1[i - 1] = c;
        s1[i - 1] = s;
        // second row: (-x s) a + (x c) b
        c2[i - 1] = -x * s;
        s2[i - 1] = x * c;
    }
    let radius = nf.powf(-gamma);
    let r2 = radius * radius * nf;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut stream = DrawStream::new(seed, &[STREAM_TAG, n as u64, j]);
            let (mut u, mut v) = (0.0, 0.0);
            for i in 0..n {
                let a = flat.draw(&mut stream);
                let b = flat.draw(&mut stream);
                u += c1[i] * a + s1[i] * b;
                v += c2[i] * a + s2[i] * b;
            }
            // compare n (U^2 + U'^2) with n radius^2
            u64::from(u * u + v * v <= r2)
        })
        .sum();
    let estimate = hits as f64 / trials as f64;
    let se = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(SmallBallEstimate {
        law: law.label(),
        n,
        t,
        gamma,
        trials,
        hits,
        estimate,
        se,
        radius,
        upper_bound: if hits == 0 { 3.0 / trials as f64 } else { estimate },
    })
}

/// Least-squares slope of `log(estimate)` against `log(n)`; zero-hit rows
/// are dropped.
pub fn fit_decay_exponent(estimates: &[SmallBallEstimate]) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| {
            if e.hits == 0 {
                log::warn!("dropping zero-hit estimate at n = {}", e.n);
            }
            e.hits > 0
        })
        .map(|e| ((e.n as f64).ln(), e.estimate.ln()))
        .collect();
    let mut ns: Vec<u64> = pts.iter().map(|p| p.0.to_bits()).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need estimates with hits at 3 distinct n, have {}",
            ns.len()
        )));
    }
    let (slope, intercept, residual) = least_squares(&pts);
    Ok(DecayFit {
        slope,
        intercept,
        residual,
    })
}

/// `(slope, intercept, rms residual)` of the line through `pts`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, (rss / m).sqrt())
}

pub fn estimates_to_csv(rows: &[SmallBallEstimate]) -> String {
    let mut out = String::from("n,gamma,trials,hits,estimate,se\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.gamma, r.trials, r.hits, r.estimate, r.se));
    }
    out
}
