use serde::{Deserialize, Serialize};

use super::Partition;
use crate::error::{Error, Result};
use crate::sm::SampledPath;
use crate::summation::NeumaierSum;

/// Default band for refinement convergence.
pub const DEFAULT_TOL: f64 = 1e-3;

/// Number of trailing estimates that must agree.
pub const CONVERGENCE_WINDOW: usize = 3;

/// Integral sums along a refinement sequence of partitions.
///
/// Estimates are ordered by decreasing mesh. `converged` holds iff the last
/// [`CONVERGENCE_WINDOW`] estimates all lie within `tol` of each other; this
/// is a per-path diagnostic, not a certificate of the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub estimates: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub converged: bool,
    pub spread: f64,
    pub window: usize,
    pub tol: f64,
}

fn values_on(path: &SampledPath, p: &Partition, name: &str) -> Result<Vec<f64>> {
    if !path.covers(p.points()[0], p.t_end()) {
        return Err(Error::domain(format!(
            "partition [0, {}] exceeds the domain of {name} [{}, {}]",
            p.t_end(),
            path.t0(),
            path.t_end()
        )));
    }
    p.points().iter().map(|&t| path.value_at(t)).collect()
}

fn midpoint_weighted(
    integrand: &SampledPath,
    integrator: &SampledPath,
    p: &Partition,
) -> Result<f64> {
    let f = values_on(integrand, p, "integrand")?;
    let g = values_on(integrator, p, "integrator")?;
    let mut acc = NeumaierSum::new();
    for k in 1..f.len() {
        acc.push(0.5 * (f[k - 1] + f[k]) * (g[k] - g[k - 1]));
    }
    Ok(acc.value())
}

/// `Σ_k (ξ_{t_{k-1}} + ξ_{t_k})/2 · (η_{t_k} − η_{t_{k-1}})`.
pub fn symmetric_sum(xi: &SampledPath, eta: &SampledPath, p: &Partition) -> Result<f64> {
    midpoint_weighted(xi, eta, p)
}

/// Stieltjes sum of `f` against a bounded-variation path `v`, with the same
/// endpoint averaging as [`symmetric_sum`].
pub fn stieltjes_integral(f: &SampledPath, v: &SampledPath, p: &Partition) -> Result<f64> {
    midpoint_weighted(f, v, p)
}

/// Symmetric sums along `refinement` (strictly decreasing mesh, ≥ 3 entries).
pub fn symmetric_integral(
    xi: &SampledPath,
    eta: &SampledPath,
    refinement: &[Partition],
    tol: f64,
) -> Result<ConvergenceReport> {
    if refinement.len() < CONVERGENCE_WINDOW {
        return Err(Error::domain(format!(
            "need at least {CONVERGENCE_WINDOW} partitions, got {}",
            refinement.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tol must be positive"));
    }
    let meshes: Vec<f64> = refinement.iter().map(Partition::mesh).collect();
    if meshes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("refinement meshes must strictly decrease"));
    }
    let estimates = refinement
        .iter()
        .zip(&meshes)
        .map(|(p, &mesh)| Ok((mesh, symmetric_sum(xi, eta, p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_estimates(estimates, tol))
}

impl ConvergenceReport {
    pub fn from_estimates(estimates: Vec<(f64, f64)>, tol: f64) -> Self {
        let tail = &estimates[estimates.len().saturating_sub(CONVERGENCE_WINDOW)..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| {
                (lo.min(v), hi.max(v))
            });
        let spread = hi - lo;
        Self {
            extrapolated: estimates.last().map_or(f64::NAN, |e| e.1),
            converged: tail.len() == CONVERGENCE_WINDOW && spread < tol,
            spread,
            estimates,
            window: CONVERGENCE_WINDOW,
            tol,
        }
    }
}
