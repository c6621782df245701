//! Chain and substitution rules for symmetric integrals of `f(μ_t, V_t)`.

mod antiderivative;
mod field;
mod quadrature;
mod rules;

pub use antiderivative::{antiderivative_eval, Antiderivative, DEFAULT_STEP};
pub use field::{field_catalog, Field2Fn, ScalarField2, TestBox, FIELD_NAMES};
pub use quadrature::composite_simpson;
pub use rules::{
    chain_rule_rhs, compose, verify_chain_rule, verify_substitution_rule, RuleCheck,
};
