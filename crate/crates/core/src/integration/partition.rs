use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dyadic level whose point vector we are willing to allocate.
pub const MAX_DYADIC_LEVEL: u32 = 28;

/// `0 = t₀ < t₁ < … < t_j = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("a partition needs at least 2 points"));
        }
        if points[0] != 0.0 {
            return Err(Error::domain("partitions start at 0"));
        }
        if points.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("non-finite partition point"));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "partition not strictly increasing at {} → {}",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of subintervals `j`.
    pub fn intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn mesh(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// The partition with `t` added; `t` must fall strictly inside.
    pub fn with_point(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < self.t_end()) || self.points.contains(&t) {
            return Err(Error::domain(format!("cannot insert {t}")));
        }
        let mut pts = self.points.clone();
        let at = pts.partition_point(|&p| p < t);
        pts.insert(at, t);
        Self::new(pts)
    }
}

impl TryFrom<Vec<f64>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Partition> for Vec<f64> {
    fn from(p: Partition) -> Self {
        p.points
    }
}

/// `t_k = kT/j`, `0 ≤ k ≤ j`.
pub fn uniform_partition(t_end: f64, j: usize) -> Result<Partition> {
    if j == 0 {
        return Err(Error::domain("j must be ≥ 1"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain(format!("T = {t_end} must be positive")));
    }
    let mut points: Vec<f64> = (0..=j).map(|k| k as f64 * t_end / j as f64).collect();
    points[j] = t_end;
    Partition::new(points)
}

/// `2ⁿ + 1` equally spaced points on `[0, T]`.
pub fn dyadic_partition(t_end: f64, n: u32) -> Result<Partition> {
    if n > MAX_DYADIC_LEVEL {
        return Err(Error::Resource(format!(
            "dyadic level {n} exceeds {MAX_DYADIC_LEVEL}"
        )));
    }
    uniform_partition(t_end, 1usize << n)
}
