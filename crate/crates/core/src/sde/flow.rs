use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Sigma;
use crate::error::{Error, Result};

/// Uniform node set `lo + j·step`, `0 ≤ j < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn hi(&self) -> f64 {
        self.node(self.count - 1)
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.step
    }

    /// Cell index and local coordinate in `[0, 1]`.
    fn locate(&self, z: f64, what: &str) -> Result<(usize, f64)> {
        let p = (z - self.lo) / self.step;
        let last = (self.count - 1) as f64;
        if !(p >= -1e-9 && p <= last + 1e-9) {
            return Err(Error::domain(format!(
                "{what} = {z} outside flow table [{}, {}]",
                self.lo,
                self.hi()
            )));
        }
        let i = (p.floor().max(0.0) as usize).min(self.count - 2);
        Ok((i, (p - i as f64).clamp(0.0, 1.0)))
    }
}

/// Tabulated flow `F(r, x)` of `∂F/∂r = σ(F)`, `F(0, x) = x`, with `∂F/∂x`.
///
/// Nodes also carry `∂F/∂r = σ(F)` and `∂²F/∂r∂x = σ′(F)·∂F/∂x`, which makes
/// bicubic Hermite interpolation available between nodes.
#[derive(Debug, Clone)]
pub struct FlowTable {
    sigma: Sigma,
    r_grid: Axis,
    x_grid: Axis,
    f_values: Vec<f64>,
    dfdx_values: Vec<f64>,
    dfdr_values: Vec<f64>,
    d2fdrdx_values: Vec<f64>,
}

#[inline]
fn hermite(t: f64) -> ([f64; 2], [f64; 2], [f64; 2], [f64; 2]) {
    let t2 = t * t;
    let t3 = t2 * t;
    // value basis (A) and slope basis (B), with their derivatives
    let a = [2.0 * t3 - 3.0 * t2 + 1.0, -2.0 * t3 + 3.0 * t2];
    let b = [t3 - 2.0 * t2 + t, t3 - t2];
    let da = [6.0 * t2 - 6.0 * t, -6.0 * t2 + 6.0 * t];
    let db = [3.0 * t2 - 4.0 * t + 1.0, 3.0 * t2 - 2.0 * t];
    (a, b, da, db)
}

impl FlowTable {
    pub fn sigma(&self) -> &Sigma {
        &self.sigma
    }

    pub fn r_grid(&self) -> Axis {
        self.r_grid
    }

    pub fn x_grid(&self) -> Axis {
        self.x_grid
    }

    #[inline]
    fn idx(&self, ir: usize, ix: usize) -> usize {
        ir * self.x_grid.count + ix
    }

    /// Stored node value `F(r_i, x_j)`.
    pub fn node_value(&self, ir: usize, ix: usize) -> f64 {
        self.f_values[self.idx(ir, ix)]
    }

    /// Stored node value `∂F/∂x(r_i, x_j)`.
    pub fn node_dfdx(&self, ir: usize, ix: usize) -> f64 {
        self.dfdx_values[self.idx(ir, ix)]
    }

    /// `(F(r, x), ∂F/∂x(r, x))` by bicubic Hermite interpolation.
    pub fn eval(&self, r: f64, x: f64) -> Result<(f64, f64)> {
        let (ir, u) = self.r_grid.locate(r, "r")?;
        let (ix, w) = self.x_grid.locate(x, "x")?;
        let (hr, hx) = (self.r_grid.step, self.x_grid.step);
        let (ar, br, _, _) = hermite(u);
        let (ax, bx, dax, dbx) = hermite(w);
        let mut f = 0.0;
        let mut fx = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let k = self.idx(ir + a, ix + b);
                let (v, vr, vx, vrx) = (
                    self.f_values[k],
                    self.dfdr_values[k],
                    self.dfdx_values[k],
                    self.d2fdrdx_values[k],
                );
                let along_r = ar[a] * v + hr * br[a] * vr;
                let along_r_slope = ar[a] * vx + hr * br[a] * vrx;
                f += ax[b] * along_r + hx * bx[b] * along_r_slope;
                fx += dax[b] * along_r / hx + dbx[b] * along_r_slope;
            }
        }
        Ok((f, fx))
    }

    pub fn value(&self, r: f64, x: f64) -> Result<f64> {
        Ok(self.eval(r, x)?.0)
    }

    pub fn dfdx(&self, r: f64, x: f64) -> Result<f64> {
        Ok(self.eval(r, x)?.1)
    }

    /// `(F(r, x_lo), F(r, x_hi))`, the values reachable at `r`.
    pub fn row_range(&self, r: f64) -> Result<(f64, f64)> {
        Ok((
            self.value(r, self.x_grid.lo)?,
            self.value(r, self.x_grid.hi())?,
        ))
    }

    /// Smallest `∂F/∂x` over all nodes.
    pub fn min_dfdx(&self) -> f64 {
        self.dfdx_values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn rk4_flow_step(sigma: &Sigma, f: f64, fx: f64, h: f64) -> (f64, f64) {
    let rhs = |f: f64, fx: f64| (sigma.value(f), sigma.d1(f) * fx);
    let k1 = rhs(f, fx);
    let k2 = rhs(f + 0.5 * h * k1.0, fx + 0.5 * h * k1.1);
    let k3 = rhs(f + 0.5 * h * k2.0, fx + 0.5 * h * k2.1);
    let k4 = rhs(f + h * k3.0, fx + h * k3.1);
    (
        f + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        fx + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// `(F(r, x), ∂F/∂x(r, x))` by direct RK4 integration, no table.
pub(crate) fn flow_point(sigma: &Sigma, r: f64, x: f64, h: f64) -> (f64, f64) {
    let n = (r.abs() / h).ceil().max(1.0) as usize;
    let step = r / n as f64;
    (0..n).fold((x, 1.0), |(f, fx), _| rk4_flow_step(sigma, f, fx, step))
}

/// Default x-node count: spacing about `16h`, between 4 and 4097 nodes.
fn default_x_nodes(width: f64, h: f64) -> usize {
    ((width / (16.0 * h)).ceil() as usize + 1).clamp(4, 4097)
}

/// Flow table on `r_range × x_range` with RK4 step `h` in `r`.
pub fn build_flow(sigma: &Sigma, r_range: (f64, f64), x_range: (f64, f64), h: f64) -> Result<FlowTable> {
    let nodes = default_x_nodes(x_range.1 - x_range.0, h);
    build_flow_with(sigma, r_range, x_range, h, nodes)
}

/// As [`build_flow`] with an explicit number of x nodes.
///
/// Each x node is integrated from `r = 0` forwards and backwards with fixed
/// step `h` jointly with the variational equation
/// `d(∂F/∂x)/dr = σ′(F)·∂F/∂x`. The r nodes are the multiples of `h`
/// covering `r_range ∪ {0}`.
pub fn build_flow_with(
    sigma: &Sigma,
    r_range: (f64, f64),
    x_range: (f64, f64),
    h: f64,
    x_nodes: usize,
) -> Result<FlowTable> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("flow step {h} must be positive")));
    }
    let finite = [r_range.0, r_range.1, x_range.0, x_range.1].iter().all(|v| v.is_finite());
    if !finite || r_range.0 > r_range.1 || x_range.0 >= x_range.1 {
        return Err(Error::domain(format!(
            "invalid flow box r ∈ {r_range:?}, x ∈ {x_range:?}"
        )));
    }
    if x_nodes < 2 {
        return Err(Error::domain("need at least 2 x nodes"));
    }
    let k_lo = (r_range.0.min(0.0) / h).floor() as i64;
    let k_hi = ((r_range.1.max(0.0) / h).ceil() as i64).max(k_lo + 1);
    let nr = (k_hi - k_lo + 1) as usize;
    if nr.saturating_mul(x_nodes) > 1 << 26 {
        return Err(Error::Resource(format!("flow table of {nr} × {x_nodes} nodes")));
    }
    let r_grid = Axis {
        lo: k_lo as f64 * h,
        step: h,
        count: nr,
    };
    let x_grid = Axis {
        lo: x_range.0,
        step: (x_range.1 - x_range.0) / (x_nodes - 1) as f64,
        count: x_nodes,
    };

    // Grönwall: |F(r, x)| ≤ (|x| + |σ(0)|·|r|)·exp(L|r|) under bounded σ′.
    let r_max = r_range.0.abs().max(r_range.1.abs());
    let x_max = x_range.0.abs().max(x_range.1.abs());
    let width = x_range.1 - x_range.0;
    let growth = (x_max + sigma.value(0.0).abs() * r_max) * (sigma.derivative_bound() * r_max).exp();
    let safety = 10.0 * growth + 10.0 * width;

    let zero = (-k_lo) as usize;
    let columns = (0..x_nodes)
        .into_par_iter()
        .map(|ix| -> Result<Vec<(f64, f64)>> {
            let x = x_grid.node(ix);
            let mut col = vec![(0.0, 0.0); nr];
            col[zero] = (x, 1.0);
            for (dir, range) in [(1.0, (zero + 1)..nr), (-1.0, 0..zero)] {
                let mut state = (x, 1.0);
                let order: Vec<usize> = if dir > 0.0 {
                    range.collect()
                } else {
                    range.rev().collect()
                };
                for ir in order {
                    state = rk4_flow_step(sigma, state.0, state.1, dir * h);
                    if !(state.0.abs() <= safety && state.1.is_finite()) {
                        return Err(Error::BlowUp(format!(
                            "F(r = {}, x = {x}) = {} left the safety box ±{safety:.3e}",
                            r_grid.node(ir),
                            state.0
                        )));
                    }
                    col[ir] = state;
                }
            }
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = nr * x_nodes;
    let mut table = FlowTable {
        sigma: sigma.clone(),
        r_grid,
        x_grid,
        f_values: vec![0.0; n],
        dfdx_values: vec![0.0; n],
        dfdr_values: vec![0.0; n],
        d2fdrdx_values: vec![0.0; n],
    };
    for (ix, col) in columns.into_iter().enumerate() {
        for (ir, (f, fx)) in col.into_iter().enumerate() {
            let k = table.idx(ir, ix);
            table.f_values[k] = f;
            table.dfdx_values[k] = fx;
            table.dfdr_values[k] = sigma.value(f);
            table.d2fdrdx_values[k] = sigma.d1(f) * fx;
        }
    }
    Ok(table)
}

/// `H(r, y)`: the `x` with `F(r, x) = y`, by bisection plus one Newton step.
pub fn invert_flow(flow: &FlowTable, r: f64, y: f64) -> Result<f64> {
    let (y_lo, y_hi) = flow.row_range(r)?;
    let slack = 1e-12 * y.abs().max(1.0);
    if !(y >= y_lo - slack && y <= y_hi + slack) {
        return Err(Error::domain(format!(
            "y = {y} outside the flow range [{y_lo}, {y_hi}] at r = {r}"
        )));
    }
    let (mut lo, mut hi) = (flow.x_grid.lo, flow.x_grid.hi());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if flow.value(r, mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let (f, fx) = flow.eval(r, x)?;
    let corrected = x - (f - y) / fx;
    Ok(if corrected.is_finite() {
        corrected.clamp(flow.x_grid.lo, flow.x_grid.hi())
    } else {
        x
    })
}

/// Central-difference step for [`check_inverse_pde`].
const PDE_FD_STEP: f64 = 1e-4;

/// Max of `|∂H/∂r + σ(y)·∂H/∂y|` over `samples` random interior points,
/// derivatives by central differences with step `1e-4`.
pub fn check_inverse_pde(flow: &FlowTable, samples: usize) -> Result<f64> {
    let (r, x) = (flow.r_grid, flow.x_grid);
    let margin_r = 0.2 * (r.hi() - r.lo);
    let margin_x = 0.2 * (x.hi() - x.lo);
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f10);
    let d = PDE_FD_STEP;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let rr = rng.gen_range((r.lo + margin_r)..=(r.hi() - margin_r).max(r.lo + margin_r));
        let xx = rng.gen_range((x.lo + margin_x)..=(x.hi() - margin_x));
        let y = flow.value(rr, xx)?;
        let h_r = (invert_flow(flow, rr + d, y)? - invert_flow(flow, rr - d, y)?) / (2.0 * d);
        let h_y = (invert_flow(flow, rr, y + d)? - invert_flow(flow, rr, y - d)?) / (2.0 * d);
        worst = worst.max((h_r + flow.sigma.value(y) * h_y).abs());
    }
    Ok(worst)
}
