//! Real zeros of random trigonometric polynomials
//! `P_n(t) = sum_k a_k cos(kt + theta_k) + b_k sin(kt + theta_k)` with
//! general (including atomic) coefficient laws.
//!
//! Certified zero counting by sign changes and by the exact Kac-Rice
//! component count, Gaussian closed forms, characteristic-function probes,
//! small-ball Monte Carlo, Edgeworth expansions and the experiment harness
//! behind the `rtpz` binary.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cramer;
pub mod distributions;
pub mod edgeworth;
pub mod error;
pub mod gaussian_reference;
pub mod harness;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod smallball;
pub mod special;
pub mod summation;
pub mod trigpoly;
pub mod zeros;

pub use distributions::{CoefficientLaw, DiscreteAtoms};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentKind, ExperimentReport, SuiteConfig};
pub use rng::DrawStream;
pub use trigpoly::{Mode, PhasePolicy, Poly, TrigPolynomial};
pub use zeros::{Method, ZeroCount, ZeroCounter};
