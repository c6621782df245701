use rayon::prelude::*;

use crate::error::{Error, Result};

/// Linear-interpolation quantile of a sample (the "type 7" rule).
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("q = {q} not in [0, 1]")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN in sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Runs `experiment(seed)` for `seed = 0..seeds` and returns the empirical
/// `q`-quantile of the outputs.
///
/// Seeds are evaluated in parallel and sorted before the quantile is taken, so
/// the answer does not depend on scheduling.
pub fn boundedness_quantile<E>(experiment: E, seeds: usize, q: f64) -> Result<f64>
where
    E: Fn(u64) -> Result<f64> + Sync,
{
    if seeds < 10 {
        return Err(Error::domain(format!("need at least 10 seeds, got {seeds}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("q = {q} must lie in (0, 1)")));
    }
    let outputs = (0..seeds as u64)
        .into_par_iter()
        .map(&experiment)
        .collect::<Result<Vec<f64>>>()?;
    empirical_quantile(&outputs, q)
}
