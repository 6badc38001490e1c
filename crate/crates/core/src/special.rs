//! Gaussian special functions. `erf`/`erfc` come from `libm` (a port of the
//! musl/FreeBSD implementations, accurate to about one ulp).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, evaluated through `erfc` so both tails keep
/// relative accuracy.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// P(|Z| < d) for a standard normal Z.
#[inline]
pub fn normal_mass_symmetric(d: f64) -> f64 {
    if d <= 0.0 {
        0.0
    } else {
        erf(d * FRAC_1_SQRT_2)
    }
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// E|Z|^p for a standard normal Z, p > -1.
pub fn gaussian_abs_moment(p: f64) -> f64 {
    2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / PI.sqrt()
}

/// Probabilists' Hermite polynomials He_0..He_k at x.
pub fn hermite_he(k: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(k + 1);
    h.push(1.0);
    if k >= 1 {
        h.push(x);
    }
    for j in 2..=k {
        let next = x * h[j - 1] - (j as f64 - 1.0) * h[j - 2];
        h.push(next);
    }
    h
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}
