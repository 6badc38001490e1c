//! Scalar abstraction for the polynomial evaluation and zero-counting code.
//!
//! Coefficient laws and all probabilistic oracles work in `f64`; the
//! deterministic machinery (evaluation, sup bounds, certified root
//! isolation) is written once for any [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, NumAssign};

pub trait Real:
    Float + FloatConst + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; every literal in the generic code goes through here.
    fn of(x: f64) -> Self;

    fn of_usize(k: usize) -> Self;

    fn as_f64(self) -> f64;
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn of_usize(k: usize) -> Self {
        k as f64
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn of_usize(k: usize) -> Self {
        k as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}
