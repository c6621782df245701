//! Numerical laboratory for symmetric (Stratonovich-type) integration with
//! respect to random Fourier-series stochastic measures.
//!
//! The crate is organised around the objects that appear in the experiments:
//!
//! * [`sm`] samples the measure `μ(A) = Σ αᵢ εᵢ ∫_A cos(it) dt`, its paths
//!   `μ_t = μ((0, t])` and interval masses, with seeded Rademacher signs.
//! * [`integration`] evaluates symmetric integral sums, Stieltjes sums, strong
//!   n-variation estimators and Monte Carlo quantiles.
//! * [`calculus`] checks the chain and substitution rules for `f(μ_t, V_t)`.
//! * [`sde`] solves `∘dX = σ(X)∘dμ + b(X, t)dt` through the flow of `σ`.
//! * [`counterexamples`] builds certified oscillating coefficient profiles.

// `!(x > 0.0)` is deliberate: it also rejects NaN. Failed constructions carry
// their partial certificate by value.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::result_large_err)]

pub mod calculus;
pub mod counterexamples;
pub mod error;
pub mod integration;
pub mod sde;
pub mod sm;
pub mod summation;

pub use error::{Error, Result};
