//! Edgeworth expansions built from averaged, whitened cumulants.
//!
//! The log characteristic function of the normalized sum is
//! `-|u|^2/2 + sum_{j>=1} n^{-j/2} A_j(u)` with
//! `A_j(u) = sum_{|nu| = j+2} chi_nu / nu! (iu)^nu`. Exponentiating the tail
//! gives `sum_l n^{-l/2} E_l(u)` where `E_0 = 1` and
//! `l E_l = sum_{j=1}^{l} j A_j E_{l-j}` (the complete Bell polynomial
//! recurrence). The inverse Fourier transform maps `(iu)^nu e^{-|u|^2/2}` to
//! `He_nu(x) phi(x)`, which turns each `E_l` into the density correction `P_l`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::cramer::MixingFamily;
use crate::distributions::{CoefficientLaw, DiscreteAtoms};
use crate::error::{invalid, Error, Result};
use crate::special::{erfc, factorial, gaussian_abs_moment, hermite_he, normal_cdf, normal_mass_symmetric, normal_pdf, INV_SQRT_2PI};

pub const MAX_ORDER: usize = 6;
/// Upper limit on `(atoms)^n` for the convolution oracle.
pub const ORACLE_MAX_PRODUCTS: f64 = 2e7;
const ORACLE_MERGE_TOL: f64 = 1e-14;

/// Multi-index `(nu_1, nu_2)`; one-dimensional tables use `nu_2 = 0`.
pub type MultiIndex = (usize, usize);

/// Polynomial in `iu`, keyed by exponent multi-index.
pub type IuPolynomial = BTreeMap<MultiIndex, f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantTable {
    pub dim: usize,
    pub order: usize,
    /// Average whitened cumulants `chi_nu` for `1 <= |nu| <= order`.
    pub chi: BTreeMap<MultiIndex, f64>,
    /// Mean covariance before whitening (diagonal in every supported family).
    pub mean_covariance: [f64; 2],
}

impl CumulantTable {
    pub fn get(&self, nu: MultiIndex) -> f64 {
        self.chi.get(&nu).copied().unwrap_or(0.0)
    }
}

fn multi_indices(dim: usize, m: usize) -> Vec<MultiIndex> {
    if dim == 1 {
        vec![(m, 0)]
    } else {
        (0..=m).map(|k| (m - k, k)).collect()
    }
}

/// Averaged standardized cumulants of independent one-dimensional laws.
pub fn average_cumulants(laws: &[CoefficientLaw], s: usize) -> Result<CumulantTable> {
    if laws.is_empty() {
        return Err(invalid("need at least one law"));
    }
    if !(2..=MAX_ORDER).contains(&s) {
        return Err(invalid(format!("order s must lie in 2..={MAX_ORDER}, got {s}")));
    }
    let summaries = laws.iter().map(|l| l.moments(s)).collect::<Result<Vec<_>>>()?;
    let nf = laws.len() as f64;
    let var = summaries.iter().map(|m| m.variance).sum::<f64>() / nf;
    if !(var > 0.0) {
        return Err(Error::DegenerateLaw("mean variance is zero".into()));
    }
    let b = 1.0 / var.sqrt();
    let mut chi = BTreeMap::new();
    for m in 1..=s {
        let avg = summaries.iter().map(|x| x.cumulant(m)).sum::<f64>() / nf;
        chi.insert((m, 0), avg * b.powi(m as i32));
    }
    Ok(CumulantTable {
        dim: 1,
        order: s,
        chi,
        mean_covariance: [var, 0.0],
    })
}

/// Averaged whitened joint cumulants of the bivariate family
/// `X_{i,n}(t) = M_i (a_i, b_i)`: for `|nu| = m`,
/// `kappa_nu(X_i) = kappa_m (M_i[0][0]^nu1 M_i[1][0]^nu2 + M_i[0][1]^nu1 M_i[1][1]^nu2)`.
pub fn average_cumulants_bivariate(family: &MixingFamily, s: usize) -> Result<CumulantTable> {
    if !(2..=MAX_ORDER).contains(&s) {
        return Err(invalid(format!("order s must lie in 2..={MAX_ORDER}, got {s}")));
    }
    let law = family.law.moments(s)?;
    let n = family.n;
    let mats: Vec<[[f64; 2]; 2]> = (1..=n).map(|i| family.matrix(i)).collect();
    // mean covariance: law variance times (1/n) sum_i M_i M_i^T, which is diagonal
    let v11 = law.variance * mats.iter().map(|m| m[0][0].powi(2) + m[0][1].powi(2)).sum::<f64>() / n as f64;
    let v22 = law.variance * mats.iter().map(|m| m[1][0].powi(2) + m[1][1].powi(2)).sum::<f64>() / n as f64;
    let (b1, b2) = (1.0 / v11.sqrt(), 1.0 / v22.sqrt());
    let mut chi = BTreeMap::new();
    for m in 1..=s {
        let k = law.cumulant(m);
        for (p, q) in multi_indices(2, m) {
            let avg = mats
                .iter()
                .map(|w| {
                    let (c11, c21) = (b1 * w[0][0], b2 * w[1][0]);
                    let (c12, c22) = (b1 * w[0][1], b2 * w[1][1]);
                    c11.powi(p as i32) * c21.powi(q as i32) + c12.powi(p as i32) * c22.powi(q as i32)
                })
                .sum::<f64>()
                / n as f64;
            chi.insert((p, q), k * avg);
        }
    }
    Ok(CumulantTable {
        dim: 2,
        order: s,
        chi,
        mean_covariance: [v11, v22],
    })
}

fn nu_factorial(nu: MultiIndex) -> f64 {
    factorial(nu.0) * factorial(nu.1)
}

fn poly_mul(a: &IuPolynomial, b: &IuPolynomial) -> IuPolynomial {
    let mut out = IuPolynomial::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            *out.entry((ka.0 + kb.0, ka.1 + kb.1)).or_insert(0.0) += va * vb;
        }
    }
    out
}

/// Correction polynomials `E_1..E_{l_max}` in `iu` (index 0 holds `E_0 = 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeworthApprox {
    pub dim: usize,
    pub l_max: usize,
    pub terms: Vec<IuPolynomial>,
}

impl EdgeworthApprox {
    pub fn new(table: &CumulantTable, l_max: usize) -> Result<Self> {
        if l_max + 2 > table.order {
            return Err(invalid(format!(
                "corrections up to l = {l_max} need cumulants of order {}, table has {}",
                l_max + 2,
                table.order
            )));
        }
        let a: Vec<IuPolynomial> = (0..=l_max)
            .map(|j| {
                if j == 0 {
                    return IuPolynomial::new();
                }
                multi_indices(table.dim, j + 2)
                    .into_iter()
                    .map(|nu| (nu, table.get(nu) / nu_factorial(nu)))
                    .collect()
            })
            .collect();
        let mut e: Vec<IuPolynomial> = vec![IuPolynomial::from([((0, 0), 1.0)])];
        for l in 1..=l_max {
            let mut acc = IuPolynomial::new();
            for j in 1..=l {
                for (k, v) in poly_mul(&a[j], &e[l - j]) {
                    *acc.entry(k).or_insert(0.0) += j as f64 * v / l as f64;
                }
            }
            e.push(acc);
        }
        Ok(Self {
            dim: table.dim,
            l_max,
            terms: e,
        })
    }

    /// `P_l(x)` for a one-dimensional expansion: `sum_k c_k He_k(x)`.
    pub fn density_correction_1d(&self, l: usize, x: f64) -> f64 {
        let p = &self.terms[l];
        let kmax = p.keys().map(|k| k.0).max().unwrap_or(0);
        let he = hermite_he(kmax, x);
        p.iter().map(|(k, c)| c * he[k.0]).sum()
    }

    /// CDF of the expansion: `Phi(x) - sum_l n^{-l/2} sum_k c_k He_{k-1}(x) phi(x)`.
    pub fn cdf_1d(&self, n: usize, x: f64) -> f64 {
        let mut v = normal_cdf(x);
        if self.l_max == 0 {
            return v;
        }
        let kmax = self.terms.iter().flat_map(|p| p.keys().map(|k| k.0)).max().unwrap_or(1);
        let he = hermite_he(kmax.max(1), x);
        let phi = normal_pdf(x);
        for l in 1..=self.l_max {
            let corr: f64 = self.terms[l]
                .iter()
                .map(|(k, c)| if k.0 == 0 { 0.0 } else { -c * he[k.0 - 1] })
                .sum();
            v += (n as f64).powf(-(l as f64) / 2.0) * corr * phi;
        }
        v
    }

    pub fn density_1d(&self, n: usize, x: f64) -> f64 {
        let mut w = 1.0;
        for l in 1..=self.l_max {
            w += (n as f64).powf(-(l as f64) / 2.0) * self.density_correction_1d(l, x);
        }
        w * normal_pdf(x)
    }
}

/// Edgeworth CDF with corrections up to `l = s - 2`.
pub fn edgeworth_cdf_1d(table: &CumulantTable, n: usize, s: usize, x: f64) -> Result<f64> {
    if table.dim != 1 {
        return Err(invalid("one-dimensional table required"));
    }
    if s < 2 {
        return Err(invalid(format!("order s must lie in 2..={MAX_ORDER}, got {s}")));
    }
    Ok(EdgeworthApprox::new(table, s - 2)?.cdf_1d(n, x))
}

/// Something with a CDF that can be queried from both sides.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
}

/// A continuous CDF given by a closure.
pub struct ContinuousCdf<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> Cdf for ContinuousCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Exact law of `(X_1 + ... + X_n) / sqrt(n)` for an atomic law.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCdf {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteCdf {
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            atoms: vec![x],
            weights: vec![1.0],
            cumulative: vec![1.0],
        }
    }
}

impl Cdf for DiscreteCdf {
    fn cdf(&self, x: f64) -> f64 {
        let i = self.atoms.partition_point(|&a| a <= x);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let i = self.atoms.partition_point(|&a| a < x);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }
}

fn merge_sorted(mut pairs: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
    for (z, w) in pairs {
        match atoms.last() {
            Some(&last) if (z - last).abs() <= ORACLE_MERGE_TOL * last.abs().max(1.0) => {
                *weights.last_mut().unwrap() += w;
            }
            _ => {
                atoms.push(z);
                weights.push(w);
            }
        }
    }
    (atoms, weights)
}

/// Iterated convolution of `law` with itself `n` times, scaled by `1/sqrt(n)`.
pub fn exact_sum_cdf_oracle(law: &DiscreteAtoms, n: usize) -> Result<DiscreteCdf> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    if (law.len() as f64).powi(n as i32) > ORACLE_MAX_PRODUCTS {
        return Err(invalid(format!(
            "{} atoms to the power {n} exceeds the oracle budget of {ORACLE_MAX_PRODUCTS}",
            law.len()
        )));
    }
    let mut atoms = law.atoms().to_vec();
    let mut weights = law.weights().to_vec();
    for _ in 1..n {
        let mut pairs = Vec::with_capacity(atoms.len() * law.len());
        for (z, w) in atoms.iter().zip(&weights) {
            for (y, v) in law.atoms().iter().zip(law.weights()) {
                pairs.push((z + y, w * v));
            }
        }
        (atoms, weights) = merge_sorted(pairs);
    }
    let scale = 1.0 / (n as f64).sqrt();
    let atoms: Vec<f64> = atoms.iter().map(|z| z * scale).collect();
    let mut acc = 0.0;
    let cumulative = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    Ok(DiscreteCdf {
        atoms,
        weights,
        cumulative,
    })
}

/// `sup |F - G|` over `probes`, comparing both one-sided limits at each probe.
pub fn kolmogorov_distance(f: &dyn Cdf, g: &dyn Cdf, probes: &[f64]) -> f64 {
    probes
        .iter()
        .map(|&x| (f.cdf(x) - g.cdf(x)).abs().max((f.cdf_left(x) - g.cdf_left(x)).abs()))
        .fold(0.0, f64::max)
}

/// Probe points for comparing an atomic CDF with a continuous one: every
/// atom plus a uniform grid of `grid` points on `[-8, 8]`.
pub fn oracle_probes(oracle: &DiscreteCdf, grid: usize) -> Vec<f64> {
    let mut p = oracle.atoms().to_vec();
    p.extend((0..grid).map(|j| -8.0 + 16.0 * j as f64 / (grid - 1).max(1) as f64));
    p.sort_by(f64::total_cmp);
    p
}

/// `E|W| He_k(W)` for standard Gaussian `W`.
fn abs_hermite_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // monomial coefficients of He_k via He_{j+1} = x He_j - j He_{j-1}
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    if k == 0 {
        return gaussian_abs_moment(1.0);
    }
    for j in 1..k {
        let mut next = vec![0.0; j + 2];
        for (p, c) in cur.iter().enumerate() {
            next[p + 1] += c;
        }
        for (p, c) in prev.iter().enumerate() {
            next[p] -= j as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur.iter()
        .enumerate()
        .map(|(p, c)| if *c == 0.0 { 0.0 } else { c * gaussian_abs_moment(p as f64 + 1.0) })
        .sum()
}

/// `int_{-delta}^{delta} He_j(x) phi(x) dx`.
fn strip_hermite_integral(j: usize, delta: f64) -> f64 {
    if j == 0 {
        return normal_mass_symmetric(delta);
    }
    if j % 2 == 1 {
        return 0.0;
    }
    // He_j phi = -(He_{j-1} phi)'
    -2.0 * hermite_he(j - 1, delta)[j - 1] * normal_pdf(delta)
}

/// `(n^r / 2) int int |y| 1{|x| < n^-r} (1 + sum_{l <= l_max} n^{-l/2} P_l) rho`
/// for a bivariate table in whitened coordinates `(x, y / sigma)`.
pub fn edgeworth_kac_functional(table: &CumulantTable, n: usize, r: f64, l_max: usize) -> Result<f64> {
    if table.dim != 2 {
        return Err(invalid("bivariate table required"));
    }
    if l_max > 2 {
        return Err(invalid(format!("corrections are supported up to l = 2, got {l_max}")));
    }
    if (table.mean_covariance[0] - 1.0).abs() > 1e-9 {
        return Err(invalid("first coordinate must have unit mean variance"));
    }
    let approx = EdgeworthApprox::new(table, l_max)?;
    let nf = n as f64;
    let delta = nf.powf(-r);
    let sigma = table.mean_covariance[1].sqrt();
    let mut total = 0.0;
    for l in 0..=l_max {
        let term: f64 = approx.terms[l]
            .iter()
            .map(|(nu, c)| c * strip_hermite_integral(nu.0, delta) * abs_hermite_moment(nu.1))
            .sum();
        total += nf.powf(-(l as f64) / 2.0) * term;
    }
    Ok(sigma * 0.5 * nf.powf(r) * total)
}

/// Gaussian-averaged oscillation of `g_delta(x, y) = |y| 1{|x| < delta}`
/// over sup-norm balls of radius `eps`:
/// `int (sup_{B(z, eps)} g - inf_{B(z, eps)} g) dPhi(z)`.
///
/// The oscillation is `|y| + eps - max(|y| - eps, 0)` where the whole
/// x-window lies in the strip, `|y| + eps` where it straddles a strip edge,
/// and zero elsewhere; both Gaussian expectations have closed forms.
pub fn gaussian_averaged_modulus(delta: f64, eps: f64) -> Result<f64> {
    if !(delta > 0.0) || !(eps >= 0.0) {
        return Err(invalid(format!("need delta > 0 and eps >= 0, got {delta}, {eps}")));
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let inner = if delta > eps { normal_mass_symmetric(delta - eps) } else { 0.0 };
    let edge = normal_mass_symmetric(delta + eps) - inner;
    let e_inner = eps + 2.0 * (INV_SQRT_2PI - normal_pdf(eps)) + eps * erfc(eps / std::f64::consts::SQRT_2);
    let e_edge = (2.0 / PI).sqrt() + eps;
    Ok(inner * e_inner + edge * e_edge)
}
