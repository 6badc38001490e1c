//! Closed-form Gaussian oracles.
//!
//! For i.i.d. standard Gaussian coefficients `u_n(t) = P_n(t)/sqrt(n)` is
//! stationary with covariance `r(s) = (1/n) sum_k cos(ks)`, so
//! `(u_n(t), u_n'(t)/n)` is a centred Gaussian vector with covariance
//! `diag(1, sigma_n^2)`, `sigma_n^2 = (n+1)(2n+1) / (6 n^2)`. The Kac-Rice
//! density of zeros of a stationary process is `sqrt(lambda_2 / lambda_0) / pi`,
//! which gives [`exact_expected_zeros`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadrature;
use crate::special::{erf, normal_mass_symmetric, normal_pdf};

/// `1 / (pi sqrt 3)`.
pub const KAC_LIMIT: f64 = 0.183_776_298_473_930_7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralMoments {
    pub n: usize,
    pub lambda0: f64,
    pub lambda2: f64,
    pub sigma2: f64,
}

impl SpectralMoments {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        Self {
            n,
            lambda0: nf,
            lambda2: nf * (nf + 1.0) * (2.0 * nf + 1.0) / 6.0,
            sigma2: sigma_n2(n),
        }
    }
}

/// `(n+1)(2n+1) / (6 n^2)`.
pub fn sigma_n2(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) * (2.0 * nf + 1.0) / (6.0 * nf * nf)
}

/// Covariance of `(U_n(t), U_n'(t))`; independent of `t`.
pub fn covariance_matrix(n: usize, _t: f64) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, sigma_n2(n)]]
}

/// Expected number of zeros of `P_n` on `[a, b]`.
pub fn exact_expected_zeros(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    (b - a) / PI * ((nf + 1.0) * (2.0 * nf + 1.0) / 6.0).sqrt()
}

/// `(n^r / 2) E[|Y| 1{|X| < n^-r}]` for `(X, Y)` with covariance `diag(1, sigma_n^2)`.
pub fn gaussian_kac_functional(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let delta = nf.powf(-r);
    sigma_n2(n).sqrt() * (2.0 / PI).sqrt() * 0.5 * nf.powf(r) * normal_mass_symmetric(delta)
}

/// `E[|Y| 1{|X| < delta}]` without the `n^r / 2` prefactor.
pub fn gaussian_kac_integral(n: usize, delta: f64) -> f64 {
    sigma_n2(n).sqrt() * (2.0 / PI).sqrt() * normal_mass_symmetric(delta)
}

/// `P(X^2 + Y^2 <= delta^2)` for independent `X ~ N(0,1)`, `Y ~ N(0, sigma^2)`.
///
/// Integrates `phi(x) erf(sqrt(delta^2 - x^2) / (sigma sqrt 2))` over
/// `|x| <= delta` after the substitution `x = delta sin u`, which removes the
/// square-root endpoint singularity.
pub fn gaussian_small_ball(sigma: f64, delta: f64) -> Result<f64> {
    if !(sigma > 0.0 && delta > 0.0) {
        return Err(invalid(format!("need sigma > 0 and delta > 0, got {sigma}, {delta}")));
    }
    if delta > 40.0 * sigma.max(1.0) {
        return Ok(1.0);
    }
    let s2 = sigma * std::f64::consts::SQRT_2;
    let f = |u: f64| {
        let (s, c) = u.sin_cos();
        let x = delta * s;
        2.0 * normal_pdf(x) * erf(delta * c / s2) * delta * c
    };
    Ok(quadrature::integrate(f, 0.0, PI / 2.0, 1e-15))
}
