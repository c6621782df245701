use serde::{Deserialize, Serialize};

use super::SampledPath;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub level: u32,
    pub scale: f64,
    pub max_increment: f64,
}

/// Empirical Hölder exponent of a sampled path.
///
/// `gamma_hat` is the least-squares slope of `log(max increment)` against
/// `log(scale)`; `None` when fewer than two levels have a nonzero increment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub gamma_hat: Option<f64>,
    pub scale_table: Vec<ScaleRow>,
}

/// Max increments over lags `⌊N/2^ℓ⌋·dt` for `ℓ = 1..=levels`.
pub fn holder_diagnostic(path: &SampledPath, levels: u32) -> Result<HolderReport> {
    let intervals = path.len() - 1;
    if levels == 0 || levels >= usize::BITS || intervals < (1usize << levels) {
        return Err(Error::domain(format!(
            "{} points cannot resolve {levels} dyadic levels",
            path.len()
        )));
    }
    let v = path.values();
    let scale_table: Vec<ScaleRow> = (1..=levels)
        .map(|level| {
            let lag = intervals >> level;
            let max_increment = v
                .iter()
                .zip(&v[lag..])
                .map(|(a, b)| (b - a).abs())
                .fold(0.0, f64::max);
            ScaleRow {
                level,
                scale: lag as f64 * path.dt(),
                max_increment,
            }
        })
        .collect();

    let pts: Vec<(f64, f64)> = scale_table
        .iter()
        .filter(|r| r.max_increment > 0.0)
        .map(|r| (r.scale.ln(), r.max_increment.ln()))
        .collect();
    Ok(HolderReport {
        gamma_hat: least_squares_slope(&pts),
        scale_table,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
