//! The two oscillating constructions: a profile whose quadratic-variation
//! functional `f(ε)` has no limit as `ε → 0`, and one whose dyadic sums of
//! squared interval masses `S_n` have no limit as `n → ∞`.

mod certificate;
mod oscillator1;
mod oscillator2;
mod parseval;

pub use certificate::{CertifiedValue, Check, ConstructionFailure, VerificationReport};
pub use oscillator1::{
    construct_oscillator1, construct_oscillator1_with, Oscillator1Budget, Oscillator1Certificate,
};
pub use oscillator2::{
    construct_oscillator2, construct_oscillator2_with, diagonal_s, empirical_dyadic_s, expected_b,
    EmpiricalS, Oscillator2Certificate, Oscillator2Options,
};
pub use parseval::{f_of_eps, parseval_check, quadratic_variation_mc, ParsevalCheck};
