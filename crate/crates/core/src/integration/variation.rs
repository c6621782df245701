use rayon::prelude::*;

use super::Partition;
use crate::error::{Error, Result};
use crate::sm::{FourierSM, SampledPath};
use crate::summation::NeumaierSum;

/// Left Riemann sum of `(1/ε)∫_{[0,T₁]} |X_{s+ε} − X_s|ⁿ ds` on the path grid.
///
/// Nodes are the grid points in `[0, T₁)`; a trailing partial cell is weighted
/// by its length. `X_{s+ε}` is interpolated when `ε` is off-grid.
pub fn strong_variation_estimate(path: &SampledPath, n: u32, eps: f64, t1: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("variation order {n} must be ≥ 2")));
    }
    if !(eps > 0.0) || !(t1 > 0.0) {
        return Err(Error::domain("eps and T1 must be positive"));
    }
    if path.t0() != 0.0 {
        return Err(Error::domain("path must start at t = 0"));
    }
    let t_end = path.t_end();
    if eps >= t_end - t1 {
        return Err(Error::domain(format!(
            "eps = {eps} must be below T − T1 = {}",
            t_end - t1
        )));
    }
    let dt = path.dt();
    let full_cells = ((t1 / dt) + 1e-9).floor() as usize;
    let gap = |s: f64| -> Result<f64> {
        Ok((path.value_at(s + eps)? - path.value_at(s)?).abs().powi(n as i32))
    };
    let mut acc = NeumaierSum::new();
    for k in 0..full_cells {
        acc.push(dt * gap(path.time(k))?);
    }
    let s_last = path.time(full_cells);
    let rest = t1 - s_last;
    if rest > 1e-9 * dt {
        acc.push(rest * gap(s_last)?);
    }
    Ok(acc.value() / eps)
}

/// `Σ_k μ(Δ_k)²` with exact interval masses.
pub fn sum_squared_increments(sm: &FourierSM, p: &Partition) -> Result<f64> {
    let pts = p.points();
    let parts = (1..pts.len())
        .into_par_iter()
        .map(|k| Ok(sm.measure_of_interval(pts[k - 1], pts[k])?.value.powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.into_iter().collect::<NeumaierSum>().value())
}
