use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Error;

/// A floating-point evaluation together with a bound on its error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: f64,
    pub error: f64,
}

impl CertifiedValue {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    /// `value − error > bound`.
    pub fn certainly_above(&self, bound: f64) -> bool {
        self.value - self.error > bound
    }

    /// `value + error < bound`.
    pub fn certainly_below(&self, bound: f64) -> bool {
        self.value + self.error < bound
    }
}

/// One re-checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub error: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub(crate) fn new() -> Self {
        Self {
            checks: Vec::new(),
            passed: true,
        }
    }

    pub(crate) fn above(&mut self, label: impl Into<String>, v: CertifiedValue, bound: f64) {
        self.record(label.into(), v, bound, v.certainly_above(bound));
    }

    pub(crate) fn below(&mut self, label: impl Into<String>, v: CertifiedValue, bound: f64) {
        self.record(label.into(), v, bound, v.certainly_below(bound));
    }

    /// A structural check without a numeric value.
    pub(crate) fn require(&mut self, label: impl Into<String>, ok: bool) {
        self.record(label.into(), CertifiedValue::new(f64::from(u8::from(ok)), 0.0), 1.0, ok);
    }

    fn record(&mut self, label: String, v: CertifiedValue, bound: f64, passed: bool) {
        self.passed &= passed;
        self.checks.push(Check {
            label,
            value: v.value,
            error: v.error,
            bound,
            passed,
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// A construction that ran out of budget, with everything certified so far.
#[derive(Debug, Clone)]
pub struct ConstructionFailure<C> {
    pub error: Error,
    pub partial: C,
}

impl<C> fmt::Display for ConstructionFailure<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (partial certificate kept)", self.error)
    }
}

impl<C: fmt::Debug> std::error::Error for ConstructionFailure<C> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<C> From<ConstructionFailure<C>> for Error {
    fn from(e: ConstructionFailure<C>) -> Self {
        e.error
    }
}

/// Generous rounding allowance for a compensated sum of `terms` positive
/// terms of total size `magnitude`, each carrying a few ulps of libm error.
pub(crate) fn rounding_bound(magnitude: f64, terms: u64) -> f64 {
    let per_term = 64.0 * f64::EPSILON;
    magnitude.abs() * per_term + f64::EPSILON * (terms as f64).sqrt() * magnitude.abs()
}
