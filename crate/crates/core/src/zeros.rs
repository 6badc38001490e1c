//! Real zeros of a trigonometric polynomial on an interval.
//!
//! Two counters are provided. [`count_sign_changes`] isolates roots on a
//! grid and certifies every cell with Taylor bounds built from
//! [`TrigPolynomial::sup_bound`]. [`kac_rice_count`] locates the connected
//! components of `{|f| < delta}`; below the threshold of
//! [`estimate_threshold`] every component holds exactly one simple zero.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::quadrature;
use crate::scalar::Real;
use crate::trigpoly::{grid_points, Mode, TrigPolynomial};

/// Maximum bisection depth below an initial grid cell.
pub const MAX_DEPTH: usize = 40;
/// Absolute precision of refined root locations.
pub const ROOT_TOL: f64 = 1e-12;
/// Endpoint values below this trigger an inward nudge of [`NUDGE`].
pub const ENDPOINT_EPS: f64 = 1e-14;
pub const NUDGE: f64 = 1e-9;
/// Exponent `r` of the default `delta = min(delta_max / 2, n^-r)`.
pub const DEFAULT_DELTA_EXPONENT: f64 = 1.3;
/// Grid points per unit of `(max frequency) x (interval length)`.
const GRID_DENSITY: f64 = 16.0;
const THRESHOLD_REFINE_DEPTH: usize = 20;
const THRESHOLD_REL_GAP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SignChange,
    KacRiceComponents,
    KacRiceQuadrature,
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign-change" => Ok(Method::SignChange),
            "kac-rice" | "kac-rice-components" => Ok(Method::KacRiceComponents),
            "kac-rice-quadrature" | "quadrature" => Ok(Method::KacRiceQuadrature),
            _ => Err(invalid(format!("unknown counting method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCount {
    pub count: usize,
    pub method: Method,
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<f64>>,
    /// Interval actually scanned, after any endpoint nudge.
    pub interval: (f64, f64),
    pub nudged: bool,
    /// Some cell could not be resolved within [`MAX_DEPTH`] bisections.
    pub budget_exhausted: bool,
    /// Kac-Rice only: `delta >= delta_max`.
    pub threshold_violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Certified lower bound on `inf (|f| + |f'|)` over the interval.
    pub omega_lower: f64,
    /// Smallest sampled value of `|f| + |f'|`, an upper bound on the infimum.
    pub omega_upper: f64,
    pub f_at_a: f64,
    pub f_at_b: f64,
    pub delta_max: f64,
    pub grid_step: f64,
    /// `sup|f'| + sup|f''|`, the Lipschitz constant of `|f| + |f'|`.
    pub sup_bound: f64,
    pub interval: (f64, f64),
    pub nudged: bool,
}

impl ThresholdReport {
    /// `min(delta_max / 2, n^-r)` with the default `r`.
    pub fn default_delta(&self, n: usize) -> f64 {
        (0.5 * self.delta_max).min((n as f64).powf(-DEFAULT_DELTA_EXPONENT))
    }
}

/// Default initial grid size for an interval.
pub fn default_grid<T: Real>(poly: &TrigPolynomial<T>, lo: f64, hi: f64, mode: Mode) -> usize {
    let freq = match mode {
        Mode::Rescaled => 1.0,
        _ => poly.degree() as f64,
    };
    ((GRID_DENSITY * freq * (hi - lo)).ceil() as usize + 1).max(64)
}

/// Upper bound on the number of zeros of a degree-`n` trig polynomial on an
/// interval of the given length.
pub fn zero_budget(n: usize, length: f64, mode: Mode) -> usize {
    let period = match mode {
        Mode::Rescaled => std::f64::consts::TAU * n as f64,
        _ => std::f64::consts::TAU,
    };
    ((length / period + 1.0) * 2.0 * n as f64).floor() as usize
}

#[derive(Debug, Clone, Copy)]
struct Node<T> {
    t: T,
    f: [T; 3],
}

/// Per-call state: the polynomial, mode, derivative bounds and the cached
/// initial grid shared by every level.
pub struct ZeroCounter<'a, T: Real> {
    poly: &'a TrigPolynomial<T>,
    mode: Mode,
    lo: T,
    hi: T,
    nudged: bool,
    m1: T,
    m2: T,
    m3: T,
    err: [T; 3],
    grid: Vec<Node<T>>,
}

impl<'a, T: Real> ZeroCounter<'a, T> {
    /// Samples `f, f', f''` on `m` equispaced points of `[lo, hi]` after
    /// nudging near-zero endpoints inward.
    pub fn new(poly: &'a TrigPolynomial<T>, lo: T, hi: T, mode: Mode, m: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid(format!("need a finite interval with lo < hi, got [{lo}, {hi}]")));
        }
        if m < 2 {
            return Err(invalid("grid needs at least two points"));
        }
        let eps = T::of(ENDPOINT_EPS);
        let nudge = T::of(NUDGE);
        let (mut lo, mut hi) = (lo, hi);
        let mut nudged = false;
        if poly.eval(lo, 0, mode).abs() < eps {
            lo += nudge;
            nudged = true;
        }
        if poly.eval(hi, 0, mode).abs() < eps {
            hi -= nudge;
            nudged = true;
        }
        if !(lo < hi) {
            return Err(invalid("interval vanished after nudging its endpoints"));
        }
        let grid = grid_points(lo, hi, m)
            .into_iter()
            .map(|t| {
                let v = poly.eval_upto(t, 2, mode);
                Node { t, f: [v[0], v[1], v[2]] }
            })
            .collect();
        Ok(Self {
            poly,
            mode,
            lo,
            hi,
            nudged,
            m1: poly.sup_bound(1, mode),
            m2: poly.sup_bound(2, mode),
            m3: poly.sup_bound(3, mode),
            err: [
                poly.eval_error_bound(0, mode),
                poly.eval_error_bound(1, mode),
                poly.eval_error_bound(2, mode),
            ],
            grid,
        })
    }

    pub fn with_default_grid(poly: &'a TrigPolynomial<T>, lo: T, hi: T, mode: Mode) -> Result<Self> {
        let m = default_grid(poly, lo.as_f64(), hi.as_f64(), mode);
        Self::new(poly, lo, hi, mode, m)
    }

    pub fn interval(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    fn node(&self, t: T) -> Node<T> {
        let v = self.poly.eval_upto(t, 2, self.mode);
        Node { t, f: [v[0], v[1], v[2]] }
    }

    fn budget(&self) -> usize {
        zero_budget(self.poly.degree(), (self.hi - self.lo).as_f64(), self.mode)
    }

    /// Slack covering rounding in the sampled values over a cell of width `h`.
    fn slack(&self, h: T) -> T {
        self.err[0] + h * self.err[1] + h * h * self.err[2] + self.err[1] + h * self.err[2]
    }

    /// `Some(true)` if `f` is strictly monotone on the cell, `Some(false)` if
    /// `f - level` has no zero there, `None` if neither is certified.
    fn classify(&self, level: T, x0: &Node<T>, x1: &Node<T>) -> Option<bool> {
        let h = x1.t - x0.t;
        let half = T::of(0.5);
        let slack = self.slack(h);
        let (g0, g1) = (x0.f[0] - level, x1.f[0] - level);
        if (g0 >= T::zero()) == (g1 >= T::zero()) && g0.abs() + g1.abs() > h * self.m1 + slack {
            return Some(false);
        }
        let deriv_rem = half * self.m3 * h * h;
        let value_rem = self.m3 * h * h * h / T::of(6.0);
        for (node, hs, g) in [(x0, h, g0), (x1, -h, g1)] {
            let (d, e) = (node.f[1], node.f[2]);
            let end = d + e * hs;
            let lin_min = if (d > T::zero()) == (end > T::zero()) && d != T::zero() && end != T::zero() {
                d.abs().min(end.abs())
            } else {
                T::zero()
            };
            if lin_min - deriv_rem - slack > T::zero() {
                return Some(true);
            }
            let (a, b) = if hs > T::zero() { (T::zero(), hs) } else { (hs, T::zero()) };
            if min_abs_quadratic(g, d, half * e, a, b) - value_rem - slack > T::zero() {
                return Some(false);
            }
        }
        None
    }

    fn refine_root(&self, level: T, mut a: Node<T>, mut b: Node<T>) -> T {
        let tol = T::of(ROOT_TOL);
        let pos_a = a.f[0] - level >= T::zero();
        while b.t - a.t > tol {
            let mid = a.t + (b.t - a.t) * T::of(0.5);
            if mid <= a.t || mid >= b.t {
                break;
            }
            let v = self.poly.eval(mid, 0, self.mode) - level;
            if (v >= T::zero()) == pos_a {
                a.t = mid;
            } else {
                b.t = mid;
            }
        }
        a.t + (b.t - a.t) * T::of(0.5)
    }

    fn isolate_cell(&self, level: T, x0: Node<T>, x1: Node<T>, depth: usize, roots: &mut Vec<T>, ok: &mut bool) {
        match self.classify(level, &x0, &x1) {
            Some(true) => {
                if (x0.f[0] - level >= T::zero()) != (x1.f[0] - level >= T::zero()) {
                    roots.push(self.refine_root(level, x0, x1));
                }
            }
            Some(false) => {}
            None => {
                let mid = x0.t + (x1.t - x0.t) * T::of(0.5);
                if depth >= MAX_DEPTH || mid <= x0.t || mid >= x1.t {
                    *ok = false;
                    if (x0.f[0] - level >= T::zero()) != (x1.f[0] - level >= T::zero()) {
                        roots.push(self.refine_root(level, x0, x1));
                    }
                    return;
                }
                let xm = self.node(mid);
                self.isolate_cell(level, x0, xm, depth + 1, roots, ok);
                self.isolate_cell(level, xm, x1, depth + 1, roots, ok);
            }
        }
    }

    /// Sorted solutions of `f = level`, and whether every cell was certified.
    pub fn crossings(&self, level: T) -> (Vec<T>, bool) {
        let mut roots = Vec::new();
        let mut ok = true;
        for w in self.grid.windows(2) {
            self.isolate_cell(level, w[0], w[1], 0, &mut roots, &mut ok);
        }
        (roots, ok)
    }

    fn base_count(&self, method: Method, count: usize, certified: bool, exhausted: bool) -> ZeroCount {
        ZeroCount {
            count,
            method,
            certified: certified && count <= self.budget(),
            roots: None,
            interval: (self.lo.as_f64(), self.hi.as_f64()),
            nudged: self.nudged,
            budget_exhausted: exhausted,
            threshold_violation: false,
            delta: None,
        }
    }

    pub fn sign_changes(&self, refine: bool) -> ZeroCount {
        let (roots, ok) = self.crossings(T::zero());
        let mut zc = self.base_count(Method::SignChange, roots.len(), ok, !ok);
        if refine {
            zc.roots = Some(roots.iter().map(|r| r.as_f64()).collect());
        }
        zc
    }

    /// Certified lower bound on `inf (|f| + |f'|)` and the quantities derived from it.
    pub fn threshold(&self) -> ThresholdReport {
        let h = self.grid[1].t - self.grid[0].t;
        let lip = self.m1 + self.m2;
        let sampled = |n: &Node<T>| n.f[0].abs() + n.f[1].abs();
        let omega_upper = self.grid.iter().map(sampled).fold(T::infinity(), T::min);
        let lipschitz = omega_upper - h * lip - self.err[0] - self.err[1];

        let target = omega_upper * T::of(1.0 - THRESHOLD_REL_GAP);
        let mut taylor = T::infinity();
        let mut stack: Vec<(Node<T>, Node<T>, usize)> =
            self.grid.windows(2).map(|w| (w[0], w[1], 0)).collect();
        let mut best_upper = omega_upper;
        while let Some((x0, x1, depth)) = stack.pop() {
            let lb = self.cell_omega_lower(&x0, &x1);
            if lb >= target || depth >= THRESHOLD_REFINE_DEPTH || lb >= best_upper * T::of(1.0 - THRESHOLD_REL_GAP) {
                taylor = taylor.min(lb);
                continue;
            }
            let xm = self.node(x0.t + (x1.t - x0.t) * T::of(0.5));
            best_upper = best_upper.min(sampled(&xm));
            stack.push((xm, x1, depth + 1));
            stack.push((x0, xm, depth + 1));
        }
        let omega_lower = lipschitz.max(taylor).max(T::zero()).as_f64();
        let first = self.grid[0].f[0];
        let last = self.grid[self.grid.len() - 1].f[0];
        let f_at_a = first.as_f64();
        let f_at_b = last.as_f64();
        let e0 = self.err[0].as_f64();
        let delta_max = omega_lower
            .min((f_at_a.abs() - e0).max(0.0))
            .min((f_at_b.abs() - e0).max(0.0));
        ThresholdReport {
            omega_lower,
            omega_upper: best_upper.as_f64(),
            f_at_a,
            f_at_b,
            delta_max,
            grid_step: h.as_f64(),
            sup_bound: lip.as_f64(),
            interval: (self.lo.as_f64(), self.hi.as_f64()),
            nudged: self.nudged,
        }
    }

    /// Lower bound on `|f| + |f'|` over one cell from second-order Taylor
    /// models taken at either endpoint.
    fn cell_omega_lower(&self, x0: &Node<T>, x1: &Node<T>) -> T {
        let h = x1.t - x0.t;
        let half = T::of(0.5);
        let rem = self.m3 * (h * h * h / T::of(6.0) + half * h * h) + self.slack(h) + self.err[1];
        let mut best = T::neg_infinity();
        for (node, hs) in [(x0, h), (x1, -h)] {
            let (g, d, e) = (node.f[0], node.f[1], node.f[2]);
            let (a, b) = if hs > T::zero() { (T::zero(), hs) } else { (hs, T::zero()) };
            best = best.max(min_abs_sum(g, d, half * e, a, b) - rem);
        }
        best
    }

    /// Structural Kac-Rice count with level `delta`.
    pub fn kac_rice(&self, delta: T, threshold: &ThresholdReport) -> ZeroCount {
        let violation = !(delta.as_f64() < threshold.delta_max);
        let (up, ok_up) = self.crossings(delta);
        let (down, ok_down) = self.crossings(-delta);
        let comps = components(self.grid[0].f[0], delta, &up, &down, self.lo, self.hi);
        let mut certified = ok_up && ok_down && !violation;
        let mut count = 0;
        let mut roots = Vec::new();
        for c in &comps {
            match (c.enter, c.exit) {
                (Some(a), Some(b)) if a != b => {
                    count += 1;
                    let (na, nb) = (self.node(c.lo), self.node(c.hi));
                    roots.push(self.refine_root(T::zero(), na, nb).as_f64());
                }
                (Some(_), Some(_)) => certified = false,
                _ => {
                    // touches an endpoint: cannot happen below the threshold
                    certified = false;
                    let (na, nb) = (self.node(c.lo), self.node(c.hi));
                    if (na.f[0] >= T::zero()) != (nb.f[0] >= T::zero()) {
                        count += 1;
                        roots.push(self.refine_root(T::zero(), na, nb).as_f64());
                    }
                }
            }
        }
        let mut zc = self.base_count(Method::KacRiceComponents, count, certified, !(ok_up && ok_down));
        zc.threshold_violation = violation;
        zc.delta = Some(delta.as_f64());
        zc.roots = Some(roots);
        zc
    }

    /// `(1/2delta) int |f'| 1{|f| < delta}` by `q`-point Gauss-Legendre on
    /// each component of `{|f| < delta}`.
    pub fn kac_rice_quadrature(&self, delta: T, q: usize) -> f64 {
        let (up, _) = self.crossings(delta);
        let (down, _) = self.crossings(-delta);
        let comps = components(self.grid[0].f[0], delta, &up, &down, self.lo, self.hi);
        let rule = quadrature::gauss_legendre(q.max(2));
        let poly = self.poly;
        let mode = self.mode;
        let f1 = |t: f64| poly.eval(T::of(t), 1, mode).as_f64().abs();
        let total: f64 = comps
            .iter()
            .map(|c| {
                let (a, b) = (c.lo.as_f64(), c.hi.as_f64());
                // split once at the zero so |f'| stays smooth on each piece
                let pieces = 4;
                let w = (b - a) / pieces as f64;
                (0..pieces)
                    .map(|j| quadrature::integrate_gl(f1, a + j as f64 * w, a + (j + 1) as f64 * w, &rule))
                    .sum::<f64>()
            })
            .sum();
        total / (2.0 * delta.as_f64())
    }
}

/// A connected component of `{|f| < delta}` with the levels (`+1` for
/// `+delta`, `-1` for `-delta`) through which it is entered and left;
/// `None` where the component reaches an interval endpoint.
#[derive(Debug, Clone, Copy)]
struct Component<T> {
    lo: T,
    hi: T,
    enter: Option<i8>,
    exit: Option<i8>,
}

fn components<T: Real>(f_lo: T, delta: T, up: &[T], down: &[T], lo: T, hi: T) -> Vec<Component<T>> {
    let mut events: Vec<(T, i8)> = up.iter().map(|&t| (t, 1i8)).chain(down.iter().map(|&t| (t, -1i8))).collect();
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = Vec::new();
    let mut inside = f_lo.abs() < delta;
    let mut start = lo;
    let mut enter: Option<i8> = None;
    for (t, level) in events {
        if inside {
            out.push(Component {
                lo: start,
                hi: t,
                enter,
                exit: Some(level),
            });
            inside = false;
        } else {
            start = t;
            enter = Some(level);
            inside = true;
        }
    }
    if inside {
        out.push(Component {
            lo: start,
            hi,
            enter,
            exit: None,
        });
    }
    out
}

/// `min |c0 + c1 s + c2 s^2|` over `s` in `[a, b]`.
fn min_abs_quadratic<T: Real>(c0: T, c1: T, c2: T, a: T, b: T) -> T {
    let q = |s: T| c0 + s * (c1 + s * c2);
    let mut pts = vec![a];
    if c2 != T::zero() {
        let v = -c1 / (c2 + c2);
        if v > a && v < b {
            pts.push(v);
        }
    }
    pts.push(b);
    let vals: Vec<T> = pts.iter().map(|&s| q(s)).collect();
    if vals.windows(2).any(|w| (w[0] >= T::zero()) != (w[1] >= T::zero())) {
        return T::zero();
    }
    vals.iter().fold(T::infinity(), |m, v| m.min(v.abs()))
}

/// `min (|q0(s)| + |q0'(s)|)` over `[a, b]` for `q0 = c0 + c1 s + c2 s^2`.
fn min_abs_sum<T: Real>(c0: T, c1: T, c2: T, a: T, b: T) -> T {
    let two = T::of(2.0);
    let q0 = |s: T| c0 + s * (c1 + s * c2);
    let q1 = |s: T| c1 + two * c2 * s;
    let mut cand = vec![a, b];
    if c2 != T::zero() {
        let disc = c1 * c1 - T::of(4.0) * c2 * c0;
        if disc >= T::zero() {
            let r = disc.sqrt();
            cand.push((-c1 + r) / (two * c2));
            cand.push((-c1 - r) / (two * c2));
        }
        cand.push(-c1 / (two * c2));
        // vertices of q0 + q1 and q0 - q1
        cand.push(-(c1 + two * c2) / (two * c2));
        cand.push(-(c1 - two * c2) / (two * c2));
    } else if c1 != T::zero() {
        cand.push(-c0 / c1);
    }
    cand.into_iter()
        .filter(|s| *s >= a && *s <= b)
        .map(|s| q0(s).abs() + q1(s).abs())
        .fold(T::infinity(), T::min)
}

pub fn estimate_threshold<T: Real>(poly: &TrigPolynomial<T>, lo: T, hi: T, mode: Mode, m: usize) -> Result<ThresholdReport> {
    if m < 16 {
        return Err(invalid(format!("threshold grid needs m >= 16, got {m}")));
    }
    Ok(ZeroCounter::new(poly, lo, hi, mode, m)?.threshold())
}

pub fn count_sign_changes<T: Real>(poly: &TrigPolynomial<T>, lo: T, hi: T, mode: Mode, m: usize, refine: bool) -> Result<ZeroCount> {
    Ok(ZeroCounter::new(poly, lo, hi, mode, m)?.sign_changes(refine))
}

/// Kac-Rice count at level `delta`; the threshold is estimated on the
/// default grid.
pub fn kac_rice_count<T: Real>(poly: &TrigPolynomial<T>, lo: T, hi: T, mode: Mode, delta: T) -> Result<ZeroCount> {
    if !(delta > T::zero()) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let zc = ZeroCounter::with_default_grid(poly, lo, hi, mode)?;
    let report = zc.threshold();
    Ok(zc.kac_rice(delta, &report))
}

pub fn kac_rice_quadrature<T: Real>(poly: &TrigPolynomial<T>, lo: T, hi: T, mode: Mode, delta: T, q: usize) -> Result<f64> {
    if !(delta > T::zero()) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    Ok(ZeroCounter::with_default_grid(poly, lo, hi, mode)?.kac_rice_quadrature(delta, q))
}
