use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::certificate::rounding_bound;
use crate::error::{Error, Result};
use crate::sm::{CoefficientProfile, FourierSM, RademacherSequence, TruncationPolicy};
use crate::summation::{chunked_sum, NeumaierSum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsevalCheck {
    pub eps: f64,
    pub m: u64,
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub target: f64,
}

impl ParsevalCheck {
    pub fn deviation(&self) -> f64 {
        (self.partial_sum - self.target).abs()
    }

    pub fn holds(&self) -> bool {
        self.deviation() <= self.tail_bound
    }
}

/// `sin²(iε/2) / (i²ε)`.
#[inline]
pub(crate) fn qv_term(i: u64, eps: f64) -> f64 {
    let x = i as f64;
    let s = (0.5 * x * eps).sin();
    s * s / (x * x * eps)
}

/// `Σ_{i ∈ [m, n]} sin²(iε/2)/(i²ε)`.
pub(crate) fn qv_block(m: u64, n: u64, eps: f64) -> f64 {
    chunked_sum(m, n, |i| qv_term(i, eps))
}

/// Value of the full series, `(2π − ε)/8` for `0 < ε < 2π`.
#[inline]
pub(crate) fn qv_full(eps: f64) -> f64 {
    (2.0 * PI - eps) / 8.0
}

/// Compares the first `m` terms of the series with its closed form.
pub fn parseval_check(eps: f64, m: u64) -> Result<ParsevalCheck> {
    if !(eps > 0.0 && eps < 2.0 * PI) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 2π)")));
    }
    if m == 0 {
        return Err(Error::domain("M must be positive"));
    }
    Ok(ParsevalCheck {
        eps,
        m,
        partial_sum: qv_block(1, m, eps),
        tail_bound: 1.0 / (m as f64 * eps),
        target: qv_full(eps),
    })
}

/// `f(ε) = Σ αᵢ sin²(iε/2)/(i²ε)` over active indices `≤ m`, with the
/// truncation bound `1/(Mε)` when the profile continues past `m`.
pub fn f_of_eps(profile: &CoefficientProfile, eps: f64, m: u64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps.is_finite()) || m == 0 {
        return Err(Error::domain("eps and M must be positive"));
    }
    let mut acc = NeumaierSum::new();
    let mut terms = 0;
    for (a, b) in profile.clipped(m) {
        acc += qv_block(a, b, eps);
        terms += b - a + 1;
    }
    let value = acc.value();
    let truncation = if profile.extends_beyond(m) {
        1.0 / (m as f64 * eps)
    } else {
        0.0
    };
    Ok((value, truncation + rounding_bound(value, terms)))
}

/// Left Riemann sum of `∫_0^{2π} (μ_{s+ε} − μ_s)²/ε ds` for one realization.
///
/// For a finite profile the integrand is a trigonometric polynomial, so the
/// sum is exact (up to rounding) once `grid_points` exceeds twice the largest
/// active index.
pub fn quadratic_variation_mc(
    profile: &CoefficientProfile,
    eps: f64,
    grid_points: usize,
    seed: u64,
) -> Result<f64> {
    if grid_points < 1 << 10 {
        return Err(Error::domain("need at least 2^10 grid points"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("eps must be positive"));
    }
    if !profile.is_finite() {
        return Err(Error::domain("quadratic_variation_mc needs a finite profile"));
    }
    if profile.is_empty() {
        return Ok(0.0);
    }
    let truncation = TruncationPolicy {
        max_index: profile.max_index().unwrap_or(1),
        ..TruncationPolicy::default()
    };
    let sm = FourierSM::new(
        profile.clone(),
        RademacherSequence::new(seed),
        truncation,
        2.0 * PI + eps,
    )?;
    let ds = 2.0 * PI / grid_points as f64;
    let squares: Vec<f64> = (0..grid_points)
        .into_par_iter()
        .map(|k| {
            let s = k as f64 * ds;
            let d = sm.value_at(s + eps) - sm.value_at(s);
            d * d
        })
        .collect();
    let total: NeumaierSum = squares.into_iter().collect();
    Ok(total.value() * ds / eps)
}
