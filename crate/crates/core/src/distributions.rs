//! Coefficient laws: construction, sampling, characteristic functions and
//! exact moments.
//!
//! Every law exposes a closed-form characteristic function. Moments are
//! exact finite sums for atomic laws and closed forms (or adaptive
//! quadrature for absolute moments of off-centre Gaussians) otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::rng::DrawStream;
use crate::special::binomial;
use crate::summation::compensated_sum;

pub const MAX_MOMENT_ORDER: usize = 12;
pub const DEFAULT_MOMENT_ORDER: usize = 6;

/// Tolerance for "already centred with unit variance".
pub const STANDARDIZED_TOL: f64 = 1e-12;

const WEIGHT_SUM_TOL: f64 = 1e-12;
const ATOM_MERGE_TOL: f64 = 1e-12;
const MAX_BLOCK_PERIOD: usize = 20;

/// A finite atomic law with distinct, strictly increasing atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteAtoms {
    atoms: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteAtoms {
    /// Builds the law, sorting atoms and merging (near-)duplicates with
    /// summed weights.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidLaw(format!(
                "need equally many atoms and weights, got {} and {}",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidLaw("atoms must be finite".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidLaw("weights must be strictly positive".into()));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        Ok(Self::merged(atoms.into_iter().zip(weights).collect()))
    }

    fn merged(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (z, w) in pairs {
            match atoms.last() {
                Some(&last) if (z - last).abs() <= ATOM_MERGE_TOL * last.abs().max(1.0) => {
                    *weights.last_mut().unwrap() += w;
                }
                _ => {
                    atoms.push(z);
                    weights.push(w);
                }
            }
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self {
            atoms,
            weights,
            cumulative,
        }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    fn draw(&self, stream: &mut DrawStream) -> f64 {
        let u = stream.uniform() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[idx.min(self.atoms.len() - 1)]
    }

    fn char_fn(&self, t: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (z, w) in self.atoms.iter().zip(&self.weights) {
            let (s, c) = (t * z).sin_cos();
            re += w * c;
            im += w * s;
        }
        Complex64::new(re, im)
    }

    fn mean(&self) -> f64 {
        compensated_sum(self.atoms.iter().zip(&self.weights).map(|(z, w)| z * w))
    }

    fn moment_about(&self, centre: f64, k: usize) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .zip(&self.weights)
                .map(|(z, w)| w * (z - centre).powi(k as i32)),
        )
    }

    fn abs_moment(&self, k: usize) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .zip(&self.weights)
                .map(|(z, w)| w * z.abs().powi(k as i32)),
        )
    }

    fn mapped(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::merged(
            self.atoms
                .iter()
                .zip(&self.weights)
                .map(|(&z, &w)| (f(z), w))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LawKind {
    Gaussian { mean: f64, variance: f64 },
    UniformInterval { lo: f64, hi: f64 },
    DiscreteAtoms(DiscreteAtoms),
    /// Law of `sum_{l=1}^p s_l cos(2 pi l / p)` with i.i.d. Rademacher signs.
    BlockedCosine { period: usize, cosines: Vec<f64> },
    /// Law of `scale * (X - shift)` with `X` drawn from `base`.
    Affine {
        base: Box<CoefficientLaw>,
        shift: f64,
        scale: f64,
    },
}

/// A real coefficient distribution. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawDescription", into = "LawDescription")]
pub struct CoefficientLaw {
    kind: LawKind,
}

/// Exact moment information up to a chosen order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary {
    pub order: usize,
    pub mean: f64,
    pub variance: f64,
    /// `raw[k - 1] = E[X^k]`.
    pub raw: Vec<f64>,
    /// `absolute[k - 1] = E[|X|^k]`.
    pub absolute: Vec<f64>,
    /// `cumulants[k - 1] = kappa_k`.
    pub cumulants: Vec<f64>,
}

impl MomentSummary {
    pub fn cumulant(&self, k: usize) -> f64 {
        self.cumulants[k - 1]
    }

    pub fn raw_moment(&self, k: usize) -> f64 {
        self.raw[k - 1]
    }
}

impl CoefficientLaw {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance <= 0.0 {
            return Err(Error::InvalidLaw(format!(
                "gaussian needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self {
            kind: LawKind::Gaussian { mean, variance },
        })
    }

    pub fn standard_gaussian() -> Self {
        Self::gaussian(0.0, 1.0).expect("valid parameters")
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidLaw(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self {
            kind: LawKind::UniformInterval { lo, hi },
        })
    }

    pub fn discrete(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Ok(Self {
            kind: LawKind::DiscreteAtoms(DiscreteAtoms::new(atoms, weights)?),
        })
    }

    pub fn blocked_cosine(period: usize) -> Result<Self> {
        if !(3..=MAX_BLOCK_PERIOD).contains(&period) {
            return Err(Error::InvalidLaw(format!(
                "blocked cosine period must lie in 3..={MAX_BLOCK_PERIOD}, got {period}"
            )));
        }
        let cosines = (1..=period)
            .map(|l| (2.0 * PI * l as f64 / period as f64).cos())
            .collect();
        Ok(Self {
            kind: LawKind::BlockedCosine { period, cosines },
        })
    }

    /// Law of `scale * (X - shift)`.
    pub fn affine(base: CoefficientLaw, shift: f64, scale: f64) -> Result<Self> {
        if !shift.is_finite() || !scale.is_finite() || scale == 0.0 {
            return Err(Error::InvalidLaw(format!(
                "affine wrapper needs finite shift and nonzero scale, got ({shift}, {scale})"
            )));
        }
        Ok(Self {
            kind: LawKind::Affine {
                base: Box::new(base),
                shift,
                scale,
            },
        })
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    /// Short human-readable identifier used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            LawKind::Gaussian { mean, variance } => format!("gaussian({mean},{variance})"),
            LawKind::UniformInterval { lo, hi } => format!("uniform({lo},{hi})"),
            LawKind::DiscreteAtoms(d) => format!("atoms[{}]", d.len()),
            LawKind::BlockedCosine { period, .. } => format!("blocked-cosine({period})"),
            LawKind::Affine { base, .. } => format!("affine({})", base.label()),
        }
    }

    /// One draw.
    #[inline]
    pub fn draw(&self, stream: &mut DrawStream) -> f64 {
        match &self.kind {
            LawKind::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(stream);
                mean + variance.sqrt() * z
            }
            LawKind::UniformInterval { lo, hi } => lo + (hi - lo) * stream.uniform(),
            LawKind::DiscreteAtoms(d) => d.draw(stream),
            LawKind::BlockedCosine { cosines, .. } => {
                let bits = rand::RngCore::next_u64(stream);
                cosines
                    .iter()
                    .enumerate()
                    .map(|(l, c)| if bits >> l & 1 == 1 { *c } else { -*c })
                    .sum()
            }
            LawKind::Affine { base, shift, scale } => scale * (base.draw(stream) - shift),
        }
    }

    /// `count` i.i.d. draws from the stream.
    pub fn sample(&self, stream: &mut DrawStream, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(stream)).collect()
    }

    /// Characteristic function `E[exp(i t X)]`.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        match &self.kind {
            LawKind::Gaussian { mean, variance } => {
                Complex64::from_polar((-0.5 * variance * t * t).exp(), mean * t)
            }
            LawKind::UniformInterval { lo, hi } => {
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                let x = half * t;
                let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
                Complex64::from_polar(1.0, mid * t) * sinc
            }
            LawKind::DiscreteAtoms(d) => d.char_fn(t),
            LawKind::BlockedCosine { cosines, .. } => {
                Complex64::new(cosines.iter().map(|c| (c * t).cos()).product(), 0.0)
            }
            LawKind::Affine { base, shift, scale } => {
                Complex64::from_polar(1.0, -scale * shift * t) * base.char_fn(scale * t)
            }
        }
    }

    #[inline]
    pub fn abs_char_fn(&self, t: f64) -> f64 {
        match &self.kind {
            LawKind::Gaussian { variance, .. } => (-0.5 * variance * t * t).exp(),
            LawKind::BlockedCosine { cosines, .. } => {
                cosines.iter().map(|c| (c * t).cos()).product::<f64>().abs()
            }
            LawKind::Affine { base, scale, .. } => base.abs_char_fn(scale * t),
            _ => self.char_fn(t).norm(),
        }
    }

    /// Equivalent law without affine wrappers. Blocked-cosine laws are
    /// expanded into their (at most 2^20) atoms.
    pub fn flatten(&self) -> CoefficientLaw {
        match &self.kind {
            LawKind::Affine { base, shift, scale } => {
                let (shift, scale) = (*shift, *scale);
                let kind = match base.flatten().kind {
                    LawKind::Gaussian { mean, variance } => LawKind::Gaussian {
                        mean: scale * (mean - shift),
                        variance: scale * scale * variance,
                    },
                    LawKind::UniformInterval { lo, hi } => {
                        let (a, b) = (scale * (lo - shift), scale * (hi - shift));
                        LawKind::UniformInterval {
                            lo: a.min(b),
                            hi: a.max(b),
                        }
                    }
                    LawKind::DiscreteAtoms(d) => {
                        LawKind::DiscreteAtoms(d.mapped(|z| scale * (z - shift)))
                    }
                    LawKind::BlockedCosine { .. } | LawKind::Affine { .. } => {
                        unreachable!("flatten never yields these")
                    }
                };
                CoefficientLaw { kind }
            }
            LawKind::BlockedCosine { cosines, .. } => {
                let p = cosines.len();
                let w = 0.5f64.powi(p as i32);
                let pairs = (0u64..1 << p)
                    .map(|bits| {
                        let z: f64 = cosines
                            .iter()
                            .enumerate()
                            .map(|(l, c)| if bits >> l & 1 == 1 { *c } else { -*c })
                            .sum();
                        (z, w)
                    })
                    .collect();
                CoefficientLaw {
                    kind: LawKind::DiscreteAtoms(DiscreteAtoms::merged(pairs)),
                }
            }
            _ => self.clone(),
        }
    }

    /// The atoms of a purely atomic law (after flattening), `None` otherwise.
    pub fn discrete_atoms(&self) -> Option<DiscreteAtoms> {
        match self.flatten().kind {
            LawKind::DiscreteAtoms(d) => Some(d),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.flatten().kind {
            LawKind::Gaussian { mean, .. } => *mean,
            LawKind::UniformInterval { lo, hi } => 0.5 * (lo + hi),
            LawKind::DiscreteAtoms(d) => d.mean(),
            _ => unreachable!(),
        }
    }

    pub fn variance(&self) -> f64 {
        self.central_moment_flat(&self.flatten(), 2)
    }

    fn central_moment_flat(&self, flat: &CoefficientLaw, k: usize) -> f64 {
        match &flat.kind {
            LawKind::Gaussian { variance, .. } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    let double_fact: f64 = (1..k).step_by(2).map(|j| j as f64).product();
                    double_fact * variance.powi((k / 2) as i32)
                }
            }
            LawKind::UniformInterval { lo, hi } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    (0.5 * (hi - lo)).powi(k as i32) / (k as f64 + 1.0)
                }
            }
            LawKind::DiscreteAtoms(d) => d.moment_about(d.mean(), k),
            _ => unreachable!(),
        }
    }

    /// True when the mean is 0 and the variance 1 to within 1e-12.
    pub fn is_standardized(&self) -> bool {
        let flat = self.flatten();
        let mean = flat.mean();
        let var = self.central_moment_flat(&flat, 2);
        mean.abs() <= STANDARDIZED_TOL && (var - 1.0).abs() <= STANDARDIZED_TOL
    }

    /// Exact moments and cumulants up to `order`.
    pub fn moments(&self, order: usize) -> Result<MomentSummary> {
        if order == 0 || order > MAX_MOMENT_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let flat = self.flatten();
        let mean = flat.mean();
        let central: Vec<f64> = (1..=order)
            .map(|k| {
                if k == 1 {
                    0.0
                } else {
                    self.central_moment_flat(&flat, k)
                }
            })
            .collect();
        let raw: Vec<f64> = match &flat.kind {
            LawKind::Gaussian { mean, variance } => {
                let mut m = vec![1.0, *mean];
                for k in 2..=order {
                    let next = mean * m[k - 1] + (k as f64 - 1.0) * variance * m[k - 2];
                    m.push(next);
                }
                m[1..].to_vec()
            }
            LawKind::UniformInterval { lo, hi } => (1..=order)
                .map(|k| {
                    let e = k as i32 + 1;
                    (hi.powi(e) - lo.powi(e)) / ((k as f64 + 1.0) * (hi - lo))
                })
                .collect(),
            LawKind::DiscreteAtoms(d) => (1..=order).map(|k| d.moment_about(0.0, k)).collect(),
            _ => unreachable!(),
        };
        let absolute: Vec<f64> = (1..=order)
            .map(|k| match &flat.kind {
                LawKind::Gaussian { mean, variance } => gaussian_abs_moment(*mean, *variance, k),
                LawKind::UniformInterval { lo, hi } => uniform_abs_moment(*lo, *hi, k),
                LawKind::DiscreteAtoms(d) => d.abs_moment(k),
                _ => unreachable!(),
            })
            .collect();
        let mut cumulants = cumulants_from_moments(&central);
        cumulants[0] = mean;
        let variance = if order >= 2 {
            central[1]
        } else {
            self.central_moment_flat(&flat, 2)
        };
        Ok(MomentSummary {
            order,
            mean,
            variance,
            raw,
            absolute,
            cumulants,
        })
    }

    /// Affine rescaling to mean 0 and variance 1. A law that already is
    /// standardized is returned unchanged.
    pub fn standardize(&self) -> Result<CoefficientLaw> {
        let flat = self.flatten();
        let mean = flat.mean();
        let var = self.central_moment_flat(&flat, 2);
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::DegenerateLaw(format!("variance {var}")));
        }
        if mean.abs() <= STANDARDIZED_TOL && (var - 1.0).abs() <= STANDARDIZED_TOL {
            return Ok(self.clone());
        }
        CoefficientLaw::affine(self.clone(), mean, 1.0 / var.sqrt())
    }
}

fn gaussian_abs_moment(mean: f64, variance: f64, k: usize) -> f64 {
    let sd = variance.sqrt();
    if mean == 0.0 {
        return sd.powi(k as i32) * crate::special::gaussian_abs_moment(k as f64);
    }
    if k.is_multiple_of(2) {
        // |x|^k = x^k: E X^k by the recurrence m_k = mean m_{k-1} + (k-1) var m_{k-2}
        let (mut prev, mut cur) = (1.0, mean);
        for j in 2..=k {
            (prev, cur) = (cur, mean * cur + (j as f64 - 1.0) * variance * prev);
        }
        return cur;
    }
    let f = |x: f64| {
        let z = (x - mean) / sd;
        x.abs().powi(k as i32) * crate::special::normal_pdf(z) / sd
    };
    let lo = mean - 40.0 * sd;
    let hi = mean + 40.0 * sd;
    let scale = (mean.abs() + sd).powi(k as i32);
    if lo < 0.0 && hi > 0.0 {
        quadrature::integrate(f, lo, 0.0, 1e-15 * scale) + quadrature::integrate(f, 0.0, hi, 1e-15 * scale)
    } else {
        quadrature::integrate(f, lo, hi, 1e-15 * scale)
    }
}

fn uniform_abs_moment(lo: f64, hi: f64, k: usize) -> f64 {
    let e = k as i32 + 1;
    let denom = (k as f64 + 1.0) * (hi - lo);
    if lo >= 0.0 {
        (hi.powi(e) - lo.powi(e)) / denom
    } else if hi <= 0.0 {
        (lo.abs().powi(e) - hi.abs().powi(e)) / denom
    } else {
        (lo.abs().powi(e) + hi.powi(e)) / denom
    }
}

/// Cumulants `kappa_1..kappa_s` from moments `m_1..m_s` via
/// `kappa_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k m_{n-k}`.
pub fn cumulants_from_moments(m: &[f64]) -> Vec<f64> {
    let mut kappa: Vec<f64> = Vec::with_capacity(m.len());
    for n in 1..=m.len() {
        let mut acc = m[n - 1];
        for k in 1..n {
            acc -= binomial(n - 1, k - 1) * kappa[k - 1] * m[n - k - 1];
        }
        kappa.push(acc);
    }
    kappa
}

/// Inverse of [`cumulants_from_moments`].
pub fn moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let mut m: Vec<f64> = Vec::with_capacity(kappa.len());
    for n in 1..=kappa.len() {
        let mut acc = kappa[n - 1];
        for k in 1..n {
            acc += binomial(n - 1, k - 1) * kappa[k - 1] * m[n - k - 1];
        }
        m.push(acc);
    }
    m
}

/// `|phi_{(X_1, ..., X_d)}(t_1, ..., t_d)|` for independent components.
pub fn joint_abs_char_fn(laws: &[&CoefficientLaw], t: &[f64]) -> f64 {
    assert_eq!(laws.len(), t.len());
    laws.iter().zip(t).map(|(l, &ti)| l.abs_char_fn(ti)).product()
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Rademacher law: atoms -1 and +1 with weight 1/2.
pub fn make_rademacher() -> CoefficientLaw {
    CoefficientLaw::discrete(vec![-1.0, 1.0], vec![0.5, 0.5]).expect("valid law")
}

/// Standardized uniform law on `{1, sqrt 2, sqrt 3, sqrt 5, sqrt 7}`.
pub fn make_sqrt_primes() -> CoefficientLaw {
    let atoms: Vec<f64> = [1.0f64, 2.0, 3.0, 5.0, 7.0].iter().map(|x| x.sqrt()).collect();
    CoefficientLaw::discrete(atoms, vec![0.2; 5])
        .and_then(|l| l.standardize())
        .expect("valid law")
}

/// Uniform law on `{cos(2 pi i / p)}_{i=1..p-1}` for a prime `p >= 5`, with the
/// mirror pairs `i` and `p - i` merged. Not standardized.
pub fn make_cos_atoms(p: u64) -> Result<CoefficientLaw> {
    if p < 5 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let w = 1.0 / (p - 1) as f64;
    let atoms = (1..p).map(|i| (2.0 * PI * i as f64 / p as f64).cos()).collect();
    CoefficientLaw::discrete(atoms, vec![w; (p - 1) as usize])
}

/// Standardized law of `sqrt(N)`, `N ~ Poisson(lambda)`, truncated to
/// `N <= k_max` and renormalized.
pub fn make_sqrt_poisson(lambda: f64, k_max: usize) -> Result<CoefficientLaw> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidLaw(format!("poisson rate must be positive, got {lambda}")));
    }
    let pmf: Vec<f64> = (0..=k_max)
        .map(|k| (-lambda + k as f64 * lambda.ln() - libm::lgamma(k as f64 + 1.0)).exp())
        .collect();
    let kept = compensated_sum(pmf.iter().copied());
    if kept < 1.0 - 1e-12 {
        return Err(Error::InsufficientTruncation { k: k_max, kept });
    }
    let (atoms, weights): (Vec<f64>, Vec<f64>) = pmf
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| ((k as f64).sqrt(), p / kept))
        .unzip();
    CoefficientLaw::discrete(atoms, weights)?.standardize()
}

/// Smallest truncation for which the omitted Poisson mass is below 1e-12.
pub fn default_poisson_truncation(lambda: f64) -> usize {
    let mut k = 0usize;
    let mut term = (-lambda).exp();
    let mut kept = term;
    while 1.0 - kept >= 1e-13 && k < 10_000 {
        k += 1;
        term *= lambda / k as f64;
        kept += term;
    }
    k + 4
}

pub fn make_blocked_cosine(p: usize) -> Result<CoefficientLaw> {
    CoefficientLaw::blocked_cosine(p)
}

impl CoefficientLaw {
    /// Resolves a builtin name: `gaussian`, `uniform`, `rademacher`,
    /// `sqrt-primes`, `sqrt-poisson[:lambda]`, `cos-atoms:p`,
    /// `blocked-cosine:p`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let parse_num = |a: Option<&str>, default: Option<f64>| -> Result<f64> {
            match (a, default) {
                (Some(a), _) => a
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidLaw(format!("bad parameter in {name:?}"))),
                (None, Some(d)) => Ok(d),
                (None, None) => Err(Error::InvalidLaw(format!("{name:?} needs a parameter"))),
            }
        };
        match head {
            "gaussian" | "normal" => Ok(Self::standard_gaussian()),
            "uniform" => Self::uniform(-3f64.sqrt(), 3f64.sqrt()),
            "rademacher" => Ok(make_rademacher()),
            "sqrt-primes" => Ok(make_sqrt_primes()),
            "sqrt-poisson" => {
                let lambda = parse_num(arg, Some(1.0))?;
                make_sqrt_poisson(lambda, default_poisson_truncation(lambda))
            }
            "cos-atoms" => make_cos_atoms(parse_num(arg, None)? as u64),
            "blocked-cosine" => make_blocked_cosine(parse_num(arg, None)? as usize),
            _ => Err(Error::InvalidLaw(format!("unknown law {name:?}"))),
        }
    }

    /// Parses either a builtin name or a JSON description.
    pub fn parse(arg: &str) -> Result<Self> {
        let trimmed = arg.trim();
        if trimmed.starts_with('{') {
            Ok(serde_json::from_str(trimmed)?)
        } else {
            Self::from_name(trimmed)
        }
    }
}

/// JSON form: `{"kind": "...", "params": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
enum LawDescription {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    DiscreteAtoms {
        atoms: Vec<f64>,
        weights: Vec<f64>,
    },
    BlockedCosine {
        period: usize,
    },
    Affine {
        base: Box<CoefficientLaw>,
        shift: f64,
        scale: f64,
    },
    Builtin {
        name: String,
    },
}

impl TryFrom<LawDescription> for CoefficientLaw {
    type Error = Error;

    fn try_from(d: LawDescription) -> Result<Self> {
        match d {
            LawDescription::Gaussian { mean, variance } => Self::gaussian(mean, variance),
            LawDescription::Uniform { lo, hi } => Self::uniform(lo, hi),
            LawDescription::DiscreteAtoms { atoms, weights } => Self::discrete(atoms, weights),
            LawDescription::BlockedCosine { period } => Self::blocked_cosine(period),
            LawDescription::Affine { base, shift, scale } => Self::affine(*base, shift, scale),
            LawDescription::Builtin { name } => Self::from_name(&name),
        }
    }
}

impl From<CoefficientLaw> for LawDescription {
    fn from(l: CoefficientLaw) -> Self {
        match l.kind {
            LawKind::Gaussian { mean, variance } => LawDescription::Gaussian { mean, variance },
            LawKind::UniformInterval { lo, hi } => LawDescription::Uniform { lo, hi },
            LawKind::DiscreteAtoms(d) => LawDescription::DiscreteAtoms {
                atoms: d.atoms,
                weights: d.weights,
            },
            LawKind::BlockedCosine { period, .. } => LawDescription::BlockedCosine { period },
            LawKind::Affine { base, shift, scale } => LawDescription::Affine { base, shift, scale },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn char_fn_reference_values() {
        let rad = make_rademacher();
        let v = rad.char_fn(PI);
        assert!(close(v.re, -1.0, 1e-15) && close(v.im, 0.0, 1e-15));
        assert!(close(rad.abs_char_fn(PI), 1.0, 1e-15));

        let g = CoefficientLaw::standard_gaussian();
        assert!(close(g.char_fn(1.0).re, 0.606_530_659_712_633_4, 1e-15));

        let coin = CoefficientLaw::discrete(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(coin.abs_char_fn(PI) < 1e-15);
    }

    #[test]
    fn uniform_char_fn_matches_sinc() {
        let u = CoefficientLaw::uniform(-1.0, 3.0).unwrap();
        let t = 0.7;
        // direct integral of exp(itx)/4 over [-1, 3]
        let re = quadrature::integrate(|x| (t * x).cos() / 4.0, -1.0, 3.0, 1e-15);
        let im = quadrature::integrate(|x| (t * x).sin() / 4.0, -1.0, 3.0, 1e-15);
        let v = u.char_fn(t);
        assert!(close(v.re, re, 1e-13) && close(v.im, im, 1e-13));
        assert_eq!(u.char_fn(0.0).re, 1.0);
    }

    #[test]
    fn affine_char_fn_matches_flattened_atoms() {
        let base = CoefficientLaw::discrete(vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let aff = CoefficientLaw::affine(base, 1.1, -0.7).unwrap();
        let flat = aff.flatten();
        for t in [-3.0, -0.2, 0.0, 1.5, 9.0] {
            let (a, b) = (aff.char_fn(t), flat.char_fn(t));
            assert!((a - b).norm() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn discrete_atoms_invariants() {
        let d = CoefficientLaw::discrete(vec![2.0, 1.0, 2.0], vec![0.25, 0.5, 0.25]).unwrap();
        let atoms = d.discrete_atoms().unwrap();
        assert_eq!(atoms.atoms(), &[1.0, 2.0]);
        assert_eq!(atoms.weights(), &[0.5, 0.5]);
        assert!(CoefficientLaw::discrete(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(CoefficientLaw::discrete(vec![1.0, 2.0], vec![1.0, 0.0]).is_err());
        assert!(CoefficientLaw::discrete(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(CoefficientLaw::affine(make_rademacher(), 0.0, 0.0).is_err());
        assert!(CoefficientLaw::blocked_cosine(2).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let m = CoefficientLaw::standard_gaussian().moments(4).unwrap();
        assert_eq!(m.raw_moment(4), 3.0);
        assert!(m.cumulant(4).abs() < 1e-14);
        assert!(close(m.absolute[0], (2.0 / PI).sqrt(), 1e-15));

        let shifted = CoefficientLaw::gaussian(1.5, 2.0).unwrap().moments(6).unwrap();
        assert!(close(shifted.cumulant(1), 1.5, 1e-15));
        assert!(close(shifted.cumulant(2), 2.0, 1e-14));
        for k in 3..=6 {
            assert!(shifted.cumulant(k).abs() < 1e-12, "k={k}");
        }
        // E|X| for N(1.5, 2): sigma*sqrt(2/pi)*exp(-mu^2/2s^2) + mu*(1 - 2 Phi(-mu/s))
        let s = 2f64.sqrt();
        let expect = s * (2.0 / PI).sqrt() * (-1.5f64 * 1.5 / 4.0).exp()
            + 1.5 * (1.0 - 2.0 * crate::special::normal_cdf(-1.5 / s));
        assert!(close(shifted.absolute[0], expect, 1e-12));
    }

    #[test]
    fn rademacher_moments() {
        let m = make_rademacher().moments(4).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.0);
        assert_eq!(m.cumulant(3), 0.0);
        assert_eq!(m.cumulant(4), -2.0);
    }

    #[test]
    fn uniform_moments() {
        let m = CoefficientLaw::uniform(0.0, 1.0).unwrap().moments(4).unwrap();
        assert!(close(m.raw_moment(2), 1.0 / 3.0, 1e-15));
        assert!(close(m.variance, 1.0 / 12.0, 1e-15));
        assert!(close(m.cumulant(4), -1.0 / 120.0, 1e-15));
        let m = CoefficientLaw::uniform(-1.0, 2.0).unwrap().moments(3).unwrap();
        assert!(close(m.absolute[0], (0.5 + 2.0) / 3.0, 1e-15));
    }

    #[test]
    fn unsupported_order() {
        assert!(matches!(
            make_rademacher().moments(13),
            Err(Error::UnsupportedOrder(13))
        ));
    }

    #[test]
    fn standardize_sqrt_primes_atoms() {
        let atoms: Vec<f64> = [1.0f64, 2.0, 3.0, 5.0, 7.0].iter().map(|x| x.sqrt()).collect();
        let raw = CoefficientLaw::discrete(atoms.clone(), vec![0.2; 5]).unwrap();
        let sum: f64 = atoms.iter().sum();
        let mean = sum / 5.0;
        let var = 3.6 - mean * mean;
        assert!(close(sum, 9.028_083_7, 1e-7));
        match raw.standardize().unwrap().kind() {
            LawKind::Affine { shift, scale, .. } => {
                assert!(close(*shift, 1.805_616_7, 1e-7));
                assert!(close(*shift, mean, 1e-14));
                assert!(close(1.0 / scale, 0.582_879, 1e-6));
                assert!(close(1.0 / scale, var.sqrt(), 1e-13));
            }
            other => panic!("expected affine wrapper, got {other:?}"),
        }
        let m = make_sqrt_primes().moments(6).unwrap();
        assert!(m.mean.abs() <= 1e-12);
        assert!((m.variance - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn standardize_gaussian_and_rademacher() {
        let g = CoefficientLaw::gaussian(5.0, 4.0).unwrap().standardize().unwrap();
        match g.kind() {
            LawKind::Affine { shift, scale, .. } => {
                assert_eq!(*shift, 5.0);
                assert_eq!(*scale, 0.5);
            }
            _ => panic!(),
        }
        assert_eq!(
            g.flatten().kind(),
            &LawKind::Gaussian {
                mean: 0.0,
                variance: 1.0
            }
        );
        assert_eq!(make_rademacher().standardize().unwrap(), make_rademacher());
        let point = CoefficientLaw::discrete(vec![3.0], vec![1.0]).unwrap();
        assert!(matches!(point.standardize(), Err(Error::DegenerateLaw(_))));
    }

    #[test]
    fn cos_atoms_merge_mirror_pairs() {
        let law = make_cos_atoms(5).unwrap();
        let d = law.discrete_atoms().unwrap();
        assert_eq!(d.len(), 2);
        assert!(close(d.atoms()[0], -0.809_017_0, 1e-7));
        assert!(close(d.atoms()[1], 0.309_017_0, 1e-7));
        assert!(close(d.weights()[0], 0.5, 1e-15) && close(d.weights()[1], 0.5, 1e-15));
        // sum_{i=1}^{p-1} cos(2 pi i / p) = -1, so the mean is -1/(p-1)
        assert!(close(law.mean(), -0.25, 1e-15));
        assert!(matches!(make_cos_atoms(9), Err(Error::NotPrime(9))));
        assert!(matches!(make_cos_atoms(3), Err(Error::NotPrime(3))));
        assert_eq!(make_cos_atoms(13).unwrap().discrete_atoms().unwrap().len(), 6);
    }

    #[test]
    fn sqrt_poisson_weights() {
        let law = make_sqrt_poisson(1.0, 40).unwrap();
        let d = law.discrete_atoms().unwrap();
        // atom sqrt(0) is the smallest one after standardization
        let renorm: f64 = (0..=40)
            .map(|k| (-1.0f64).exp() / crate::special::factorial(k))
            .sum();
        assert!(close(d.weights()[0], (-1.0f64).exp() / renorm, 1e-15));
        assert!(close(d.weights()[0], 0.367_879_4, 1e-7));
        assert!(law.is_standardized());
        assert!(matches!(
            make_sqrt_poisson(1.0, 5),
            Err(Error::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn blocked_cosine_moments_and_atoms() {
        let law = make_blocked_cosine(5).unwrap();
        let m = law.moments(4).unwrap();
        assert!(m.mean.abs() < 1e-15);
        assert!(close(m.variance, 2.5, 1e-14));
        // kappa_4 = -2 sum cos^4(2 pi l / p) for Rademacher signs
        let c4: f64 = (1..=5).map(|l| (2.0 * PI * l as f64 / 5.0).cos().powi(4)).sum();
        assert!(close(m.cumulant(4), -2.0 * c4, 1e-13));
        for t in [0.3, 1.7, 12.0] {
            let direct = law.char_fn(t).re;
            let flat = law.flatten().char_fn(t);
            assert!(close(direct, flat.re, 1e-13) && flat.im.abs() < 1e-13);
        }
    }

    #[test]
    fn sampling_support_and_determinism() {
        let rad = make_rademacher();
        let mut s = DrawStream::new(11, &[1]);
        let xs = rad.sample(&mut s, 100_000);
        assert!(xs.iter().all(|&x| x == -1.0 || x == 1.0));

        let law = make_blocked_cosine(5).unwrap();
        let atoms = law.discrete_atoms().unwrap();
        let mut s = DrawStream::new(11, &[2]);
        for x in law.sample(&mut s, 10_000) {
            let hit = atoms.atoms().iter().any(|a| (a - x).abs() < 1e-12);
            assert!(hit, "{x} is not one of the enumerated sign-pattern sums");
        }

        let g = CoefficientLaw::standard_gaussian();
        let a = g.sample(&mut DrawStream::new(3, &[9]), 3);
        let b = g.sample(&mut DrawStream::new(3, &[9]), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_sample_mean() {
        let g = CoefficientLaw::standard_gaussian();
        let xs = g.sample(&mut DrawStream::new(5, &[0]), 1_000_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 4.0 / 1e3);
    }

    #[test]
    fn atom_frequencies_within_five_standard_errors() {
        let law = make_sqrt_primes();
        let d = law.discrete_atoms().unwrap();
        let n = 1_000_000;
        let xs = law.sample(&mut DrawStream::new(8, &[0]), n);
        for (z, w) in d.atoms().iter().zip(d.weights()) {
            let count = xs.iter().filter(|&&x| x == *z).count() as f64;
            let se = (w * (1.0 - w) / n as f64).sqrt();
            assert!((count / n as f64 - w).abs() < 5.0 * se, "atom {z}");
        }
    }

    #[test]
    fn json_round_trip() {
        let law = make_sqrt_primes();
        let s = serde_json::to_string(&law).unwrap();
        assert!(s.contains("\"kind\":\"affine\""));
        let back: CoefficientLaw = serde_json::from_str(&s).unwrap();
        assert_eq!(back, law);

        let parsed = CoefficientLaw::parse(r#"{"kind":"gaussian","params":{"mean":0,"variance":2}}"#)
            .unwrap();
        assert!(close(parsed.variance(), 2.0, 1e-15));
        let bad = CoefficientLaw::parse(r#"{"kind":"discrete_atoms","params":{"atoms":[1],"weights":[0.3]}}"#);
        assert!(bad.is_err());
        let named = CoefficientLaw::parse(r#"{"kind":"builtin","params":{"name":"sqrt-primes"}}"#)
            .unwrap();
        assert_eq!(named, make_sqrt_primes());
    }

    #[test]
    fn names() {
        for name in [
            "gaussian",
            "uniform",
            "rademacher",
            "sqrt-primes",
            "sqrt-poisson",
            "sqrt-poisson:2.5",
            "cos-atoms:7",
            "blocked-cosine:5",
        ] {
            CoefficientLaw::from_name(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(CoefficientLaw::from_name("cauchy").is_err());
        assert!(CoefficientLaw::from_name("uniform").unwrap().is_standardized());
    }
}
