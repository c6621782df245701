use serde::{Deserialize, Serialize};

use super::flow::flow_point;
use super::{build_flow, invert_flow, Drift, FlowTable, Sigma};
use crate::calculus::ScalarField2;
use crate::error::{Error, Result};
use crate::integration::{stieltjes_integral, symmetric_sum, Partition};
use crate::sm::SampledPath;

/// Default step for both the flow and the `Y` equation.
pub const DEFAULT_H: f64 = 1e-3;

/// Fractional margin added on each side of the inferred flow box.
const BOX_MARGIN: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub r_range: (f64, f64),
    pub x_range: (f64, f64),
    pub substeps_per_interval: usize,
    pub flow_rebuilds: usize,
    /// `max_k |H(μ_k, X_k) − Y_k|`.
    pub max_roundtrip_error: f64,
}

#[derive(Debug, Clone)]
pub struct SdeSolution {
    pub x: SampledPath,
    pub y: SampledPath,
    pub flow: FlowTable,
    pub diagnostics: SolveDiagnostics,
}

fn widen((lo, hi): (f64, f64), frac: f64, min_pad: f64) -> (f64, f64) {
    let pad = frac * (hi - lo) + min_pad;
    (lo - pad, hi + pad)
}

#[inline]
fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + w * (b - a)
}

/// One RK4 step of `Y′ = g(s, μ(s), Y)` with `μ` linear across the step.
fn rk4_y(
    g: &impl Fn(f64, f64, f64) -> Result<f64>,
    s: f64,
    hs: f64,
    mu: (f64, f64),
    y: f64,
) -> Result<f64> {
    let mid = 0.5 * (mu.0 + mu.1);
    let k1 = g(s, mu.0, y)?;
    let k2 = g(s + 0.5 * hs, mid, y + 0.5 * hs * k1)?;
    let k3 = g(s + 0.5 * hs, mid, y + 0.5 * hs * k2)?;
    let k4 = g(s + hs, mu.1, y + hs * k3)?;
    Ok(y + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates `Y` over every grid interval of `mu` with `substeps` RK4 steps.
fn integrate_y(
    g: impl Fn(f64, f64, f64) -> Result<f64>,
    mu: &SampledPath,
    stride: usize,
    substeps: usize,
    y0: f64,
) -> Result<Vec<f64>> {
    let v = mu.values();
    let mut ys = Vec::with_capacity(v.len() / stride + 1);
    let mut y = y0;
    ys.push(y);
    let mut k = 0;
    while k + stride < v.len() {
        let (t_a, mu_a, mu_b) = (mu.time(k), v[k], v[k + stride]);
        let hs = stride as f64 * mu.dt() / substeps as f64;
        for j in 0..substeps {
            let w0 = j as f64 / substeps as f64;
            let w1 = (j + 1) as f64 / substeps as f64;
            let s = t_a + j as f64 * hs;
            y = rk4_y(&g, s, hs, (lerp(mu_a, mu_b, w0), lerp(mu_a, mu_b, w1)), y)?;
        }
        if !y.is_finite() {
            return Err(Error::Numeric(format!("Y blew up at t = {}", mu.time(k + stride))));
        }
        ys.push(y);
        k += stride;
    }
    Ok(ys)
}

/// Cheap pass on a coarse subgrid with the untabulated flow, to size the box.
fn estimate_y_range(sigma: &Sigma, b: &Drift, x0: f64, mu: &SampledPath, h: f64) -> Result<(f64, f64)> {
    let stride = ((mu.len() - 1) / 128).max(1);
    let ys = integrate_y(
        |s, m, y| {
            let (f, fx) = flow_point(sigma, m, y, h);
            Ok(b.value(f, s) / fx)
        },
        mu,
        stride,
        1,
        x0,
    )?;
    Ok(ys.iter().fold((x0, x0), |(lo, hi), &y| (lo.min(y), hi.max(y))))
}

/// Solves `∘dX = σ(X)∘dμ + b(X, t)dt`, `X_0 = x0`, as `X_t = F(μ_t, Y_t)` with
/// `Y′ = b(F(μ, Y), t) / ∂F/∂x(μ, Y)`, `Y_0 = x0`.
///
/// `Y` is integrated on the grid of `mu` with RK4 substeps no longer than
/// `h`, treating `μ` as piecewise linear. If `Y` leaves the flow box the box
/// is rebuilt once at four times the width.
pub fn solve_sde(sigma: &Sigma, b: &Drift, x0: f64, mu: &SampledPath, h: f64) -> Result<SdeSolution> {
    if !(h > 0.0 && h.is_finite()) || !x0.is_finite() {
        return Err(Error::domain("h must be positive and X0 finite"));
    }
    let (mu_lo, mu_hi) = mu.min_max();
    let r_range = widen((mu_lo.min(0.0), mu_hi.max(0.0)), BOX_MARGIN, 4.0 * h);
    let mut x_range = widen(estimate_y_range(sigma, b, x0, mu, h)?, BOX_MARGIN, 0.5);
    let substeps = (mu.dt() / h).ceil().max(1.0) as usize;

    for rebuilds in 0..2 {
        let flow = build_flow(sigma, r_range, x_range, h)?;
        let rhs = |s: f64, m: f64, y: f64| -> Result<f64> {
            let (f, fx) = flow.eval(m, y)?;
            Ok(b.value(f, s) / fx)
        };
        match integrate_y(rhs, mu, 1, substeps, x0) {
            Ok(ys) => {
                let xs = mu
                    .values()
                    .iter()
                    .zip(&ys)
                    .map(|(&m, &y)| flow.value(m, y))
                    .collect::<Result<Vec<f64>>>()?;
                let mut roundtrip = 0.0f64;
                for ((&m, &x), &y) in mu.values().iter().zip(&xs).zip(&ys) {
                    roundtrip = roundtrip.max((invert_flow(&flow, m, x)? - y).abs());
                }
                return Ok(SdeSolution {
                    x: SampledPath::new(mu.t0(), mu.dt(), xs)?,
                    y: SampledPath::new(mu.t0(), mu.dt(), ys)?,
                    diagnostics: SolveDiagnostics {
                        r_range,
                        x_range,
                        substeps_per_interval: substeps,
                        flow_rebuilds: rebuilds,
                        max_roundtrip_error: roundtrip,
                    },
                    flow,
                });
            }
            Err(Error::Domain(_)) => x_range = widen(x_range, 1.5, 0.0),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Resource(format!(
        "Y left the flow box x ∈ {x_range:?} after one rebuild"
    )))
}

/// `|∫Z∘dX − ∫Zσ(X)∘dμ − ∫Z b(X, s) ds|` on `p`, with `Z = ψ(μ, X)`.
pub fn verify_solution_identity(
    sol: &SdeSolution,
    sigma: &Sigma,
    b: &Drift,
    mu: &SampledPath,
    psi: &ScalarField2,
    p: &Partition,
) -> Result<f64> {
    let x = &sol.x;
    let z = mu.zip_map(x, |m, xv| psi.value(m, xv))?;
    let z_sigma = z.zip_map(x, |zv, xv| zv * sigma.value(xv))?;
    let z_drift = z.zip_map_t(x, |t, zv, xv| zv * b.value(xv, t))?;
    let clock = SampledPath::clock(mu.grid())?;
    let lhs = symmetric_sum(&z, x, p)?;
    let noise = symmetric_sum(&z_sigma, mu, p)?;
    let drift = stieltjes_integral(&z_drift, &clock, p)?;
    Ok((lhs - noise - drift).abs())
}
