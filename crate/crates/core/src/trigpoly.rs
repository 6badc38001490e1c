//! Trigonometric polynomials `P(t) = sum_k a_k cos(kt + theta_k) + b_k sin(kt + theta_k)`
//! and their three evaluation modes.
//!
//! * `Raw`: `P^{(d)}(t)`.
//! * `Normalized`: `P^{(d)}(t) / sqrt(n)`.
//! * `Rescaled`: `U(t) = P(t/n) / sqrt(n)`, so `U^{(d)}(t) = P^{(d)}(t/n) / (sqrt(n) n^d)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::CoefficientLaw;
use crate::error::{invalid, Error, Result};
use crate::rng::DrawStream;
use crate::scalar::Real;
use crate::summation::CompensatedSum;

pub const MAX_DERIV: usize = 3;

/// Every this many frequencies the cos/sin recurrence is re-anchored on a
/// directly computed value.
const REANCHOR: usize = 32;

const PHASE_STREAM_TAG: u64 = 0x7068_6173_6573;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Raw,
    #[default]
    Normalized,
    Rescaled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Mode::Raw),
            "normalized" => Ok(Mode::Normalized),
            "rescaled" => Ok(Mode::Rescaled),
            _ => Err(invalid(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", content = "value", rename_all = "snake_case")]
pub enum PhasePolicy {
    #[default]
    Zero,
    Constant(f64),
    /// Phases drawn once, uniformly on `[0, 2 pi)`, from the given seed.
    UniformRandom(u64),
    Explicit(Vec<f64>),
}

impl PhasePolicy {
    pub fn phases(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            PhasePolicy::Zero => Ok(vec![0.0; n]),
            PhasePolicy::Constant(c) => Ok(vec![*c; n]),
            PhasePolicy::UniformRandom(seed) => {
                let mut s = DrawStream::new(*seed, &[PHASE_STREAM_TAG, n as u64]);
                Ok((0..n).map(|_| std::f64::consts::TAU * s.uniform()).collect())
            }
            PhasePolicy::Explicit(v) => {
                if v.len() != n {
                    return Err(invalid(format!("explicit phases have length {}, need {n}", v.len())));
                }
                Ok(v.clone())
            }
        }
    }
}

/// One realization. Immutable; the coefficients are folded into
/// `alpha_k = a_k cos theta_k + b_k sin theta_k` and
/// `beta_k = b_k cos theta_k - a_k sin theta_k` so that
/// `P(t) = sum_k alpha_k cos(kt) + beta_k sin(kt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRecord", into = "PolyRecord", bound = "T: Real")]
pub struct TrigPolynomial<T> {
    a: Vec<T>,
    b: Vec<T>,
    theta: Vec<T>,
    alpha: Vec<T>,
    beta: Vec<T>,
}

/// JSON replay form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyRecord {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub theta: Vec<f64>,
}

impl<T: Real> TryFrom<PolyRecord> for TrigPolynomial<T> {
    type Error = Error;

    fn try_from(r: PolyRecord) -> Result<Self> {
        if r.a.len() != r.n {
            return Err(invalid(format!("record says n = {} but has {} cosine coefficients", r.n, r.a.len())));
        }
        let conv = |v: Vec<f64>| v.into_iter().map(T::of).collect();
        Self::new(conv(r.a), conv(r.b), conv(r.theta))
    }
}

impl<T: Real> From<TrigPolynomial<T>> for PolyRecord {
    fn from(p: TrigPolynomial<T>) -> Self {
        let conv = |v: &[T]| v.iter().map(|x| x.as_f64()).collect();
        PolyRecord {
            n: p.degree(),
            a: conv(&p.a),
            b: conv(&p.b),
            theta: conv(&p.theta),
        }
    }
}

impl<T: Real> TrigPolynomial<T> {
    pub fn new(a: Vec<T>, b: Vec<T>, theta: Vec<T>) -> Result<Self> {
        let n = a.len();
        if n == 0 || b.len() != n || theta.len() != n {
            return Err(invalid(format!(
                "coefficient vectors must be nonempty and of equal length, got {}, {}, {}",
                a.len(),
                b.len(),
                theta.len()
            )));
        }
        if a.iter().chain(&b).chain(&theta).any(|x| !x.is_finite()) {
            return Err(invalid("coefficients and phases must be finite"));
        }
        let (alpha, beta) = a
            .iter()
            .zip(&b)
            .zip(&theta)
            .map(|((&a, &b), &th)| {
                let (s, c) = th.sin_cos();
                (a * c + b * s, b * c - a * s)
            })
            .unzip();
        Ok(Self {
            a,
            b,
            theta,
            alpha,
            beta,
        })
    }

    pub fn with_zero_phases(a: Vec<T>, b: Vec<T>) -> Result<Self> {
        let n = a.len();
        Self::new(a, b, vec![T::zero(); n])
    }

    pub fn degree(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn cast<U: Real>(&self) -> TrigPolynomial<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::of(x.as_f64())).collect();
        TrigPolynomial::new(conv(&self.a), conv(&self.b), conv(&self.theta)).expect("finite after cast")
    }

    fn mode_factor(&self, mode: Mode) -> T {
        match mode {
            Mode::Raw => T::one(),
            Mode::Normalized | Mode::Rescaled => T::one() / T::of_usize(self.degree()).sqrt(),
        }
    }

    /// Derivatives `lo..=hi` at `t`; entries outside the range are zero. Each
    /// derivative is accumulated independently so the result does not depend
    /// on the requested range.
    fn eval_range(&self, t: T, mode: Mode, lo: usize, hi: usize) -> [T; 4] {
        assert!(hi <= MAX_DERIV, "derivative order above {MAX_DERIV}");
        let n = self.degree();
        let nt = T::of_usize(n);
        let x = match mode {
            Mode::Rescaled => t / nt,
            _ => t,
        };
        let two_pi = T::TAU();
        let x = x - two_pi * (x / two_pi).floor();
        let (s1, c1) = x.sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut acc = [CompensatedSum::<T>::new(); 4];
        for k in 1..=n {
            if k > 1 {
                if (k - 1) % REANCHOR == 0 {
                    let (sk, ck) = (T::of_usize(k) * x).sin_cos();
                    s = sk;
                    c = ck;
                } else {
                    let next_c = c * c1 - s * s1;
                    s = s * c1 + c * s1;
                    c = next_c;
                }
            }
            let (al, be) = (self.alpha[k - 1], self.beta[k - 1]);
            let even = al * c + be * s;
            let odd = be * c - al * s;
            let w = match mode {
                Mode::Rescaled => T::of_usize(k) / nt,
                _ => T::of_usize(k),
            };
            let mut wd = T::one();
            for d in 0..=hi {
                if d >= lo {
                    let term = match d {
                        0 => even,
                        1 => odd * wd,
                        2 => -even * wd,
                        _ => -odd * wd,
                    };
                    acc[d].add(term);
                }
                wd *= w;
            }
        }
        let f = self.mode_factor(mode);
        let mut out = [T::zero(); 4];
        for d in lo..=hi {
            out[d] = acc[d].value() * f;
        }
        out
    }

    /// `deriv`-th derivative at `t` in the given mode.
    pub fn eval(&self, t: T, deriv: usize, mode: Mode) -> T {
        self.eval_range(t, mode, deriv, deriv)[deriv]
    }

    /// Derivatives 0 through 3 at `t`, each identical to the matching [`eval`](Self::eval).
    pub fn eval_all(&self, t: T, mode: Mode) -> [T; 4] {
        self.eval_range(t, mode, 0, MAX_DERIV)
    }

    /// Derivatives 0 through `hi` at `t`.
    pub fn eval_upto(&self, t: T, hi: usize, mode: Mode) -> [T; 4] {
        self.eval_range(t, mode, 0, hi)
    }

    /// Values at `m` equispaced points of `[lo, hi]`, endpoints included.
    pub fn eval_grid(&self, lo: T, hi: T, m: usize, deriv: usize, mode: Mode) -> Vec<T> {
        grid_points(lo, hi, m)
            .into_par_iter()
            .map(|t| self.eval(t, deriv, mode))
            .collect()
    }

    /// Certified bound `c_mode sum_k (|a_k| + |b_k|) w_k^d` on `sup_R |f^{(d)}|`,
    /// inflated by the worst-case rounding of the sum.
    pub fn sup_bound(&self, deriv: usize, mode: Mode) -> T {
        assert!(deriv <= MAX_DERIV, "derivative order above {MAX_DERIV}");
        let n = self.degree();
        let nt = T::of_usize(n);
        let mut acc = CompensatedSum::new();
        for k in 1..=n {
            let w = match mode {
                Mode::Rescaled => T::of_usize(k) / nt,
                _ => T::of_usize(k),
            };
            acc.add((self.a[k - 1].abs() + self.b[k - 1].abs()) * w.powi(deriv as i32));
        }
        acc.value() * self.mode_factor(mode) * (T::one() + T::of(4.0) * T::epsilon())
    }

    /// Bound on the floating-point error of one [`eval`](Self::eval) call.
    pub fn eval_error_bound(&self, deriv: usize, mode: Mode) -> T {
        let n = T::of_usize(self.degree());
        T::of(8.0) * (T::of_usize(REANCHOR) + n.sqrt()) * T::epsilon() * self.sup_bound(deriv, mode)
    }
}

pub type Poly = TrigPolynomial<f64>;

/// `m` equispaced points of `[lo, hi]` with both endpoints exact.
pub fn grid_points<T: Real>(lo: T, hi: T, m: usize) -> Vec<T> {
    assert!(m >= 2, "a grid needs at least two points");
    let step = (hi - lo) / T::of_usize(m - 1);
    (0..m)
        .map(|j| if j + 1 == m { hi } else { lo + step * T::of_usize(j) })
        .collect()
}

/// Draws polynomials of one degree from one standardized law.
#[derive(Debug, Clone)]
pub struct PolySampler {
    law: CoefficientLaw,
    n: usize,
    phases: Vec<f64>,
}

impl PolySampler {
    pub fn new(law: &CoefficientLaw, n: usize, phase: &PhasePolicy) -> Result<Self> {
        if n == 0 {
            return Err(invalid("degree must be at least 1"));
        }
        let m = law.moments(2)?;
        if !law.is_standardized() {
            return Err(Error::NotStandardized {
                mean: m.mean,
                variance: m.variance,
            });
        }
        Ok(Self {
            law: law.clone(),
            n,
            phases: phase.phases(n)?,
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `a_1..a_n` then `b_1..b_n`, all from `stream`.
    pub fn sample(&self, stream: &mut DrawStream) -> Poly {
        let a = self.law.sample(stream, self.n);
        let b = self.law.sample(stream, self.n);
        Poly::new(a, b, self.phases.clone()).expect("finite draws")
    }
}

pub fn sample_polynomial(law: &CoefficientLaw, n: usize, phase: &PhasePolicy, stream: &mut DrawStream) -> Result<Poly> {
    Ok(PolySampler::new(law, n, phase)?.sample(stream))
}
