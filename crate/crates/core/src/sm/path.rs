use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_k = t0 + k·dt`, `0 ≤ k < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t0: f64,
    pub dt: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(t0: f64, dt: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::domain("a grid needs at least 2 points"));
        }
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::domain(format!("invalid grid t0={t0}, dt={dt}")));
        }
        Ok(Self { t0, dt, points })
    }

    /// `intervals + 1` points spanning `[0, t_end]`.
    pub fn uniform(t_end: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::domain("empty grid"));
        }
        Self::new(0.0, t_end / intervals as f64, intervals + 1)
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.points - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|k| self.time(k))
    }
}

/// Values of a path on a uniform grid, linearly interpolated in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

/// Relative slack (in grid steps) for snapping a time onto a grid node.
const SNAP: f64 = 1e-9;

impl SampledPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        GridSpec::new(t0, dt, values.len())?;
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("path value {k} is not finite")));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.t0, grid.dt, grid.times().map(f).collect())
    }

    /// `t ↦ c` on `grid`.
    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::from_fn(grid, |_| c)
    }

    /// `t ↦ t` on `grid`.
    pub fn clock(grid: GridSpec) -> Result<Self> {
        Self::from_fn(grid, |t| t)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            t0: self.t0,
            dt: self.dt,
            points: self.values.len(),
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// True when `[a, b]` lies inside the grid span (up to snapping slack).
    pub fn covers(&self, a: f64, b: f64) -> bool {
        let slack = SNAP * self.dt;
        a >= self.t0 - slack && b <= self.t_end() + slack
    }

    /// Linear interpolation; times within `1e-9·dt` of a node return the node
    /// value exactly.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let x = (t - self.t0) / self.dt;
        let last = (self.values.len() - 1) as f64;
        if !(x >= -SNAP && x <= last + SNAP) {
            return Err(Error::domain(format!(
                "t = {t} outside path domain [{}, {}]",
                self.t0,
                self.t_end()
            )));
        }
        let nearest = x.round();
        if (x - nearest).abs() <= SNAP {
            return Ok(self.values[nearest as usize]);
        }
        let k = x.floor() as usize;
        let w = x - k as f64;
        Ok(self.values[k] + w * (self.values[k + 1] - self.values[k]))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.t0, self.dt, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two paths on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.require_same_grid(other)?;
        Self::new(
            self.t0,
            self.dt,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Pointwise `f(t, self, other)`.
    pub fn zip_map_t(&self, other: &Self, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        self.require_same_grid(other)?;
        Self::new(
            self.t0,
            self.dt,
            (0..self.values.len())
                .map(|k| f(self.time(k), self.values[k], other.values[k]))
                .collect(),
        )
    }

    pub fn require_same_grid(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() || self.t0 != other.t0 || self.dt != other.dt {
            return Err(Error::domain("paths live on different grids"));
        }
        Ok(())
    }

    /// Writes `t,value` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.time(k), v)?;
        }
        Ok(())
    }
}
