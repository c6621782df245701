use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CoefficientProfile, GridSpec, RademacherSequence, SampledPath};
use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Default horizon `T₁ = 2π`.
pub const DEFAULT_HORIZON: f64 = 2.0 * std::f64::consts::PI;

/// Where to cut an infinite profile and how large a tail is acceptable.
///
/// Tail bounds are root-mean-square bounds over the sign realisations:
/// `(Σ_{i>M} 4/i²)^{1/2} ≤ 2/√M` for interval masses and
/// `(Σ_{i>M} 1/i²)^{1/2} ≤ 1/√M` for path values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_index: u64,
    pub tail_bound_budget: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            max_index: 1 << 20,
            tail_bound_budget: 0.05,
        }
    }
}

/// One active Fourier mode: frequency `i` and coefficient `εᵢ / i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub freq: f64,
    pub coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalMeasure {
    pub value: f64,
    pub tail_bound: f64,
}

/// `μ(A) = Σᵢ αᵢ εᵢ ∫_A cos(it) dt` on Borel subsets of `[0, T₁]`.
#[derive(Debug, Clone)]
pub struct FourierSM {
    profile: CoefficientProfile,
    signs: RademacherSequence,
    truncation: TruncationPolicy,
    horizon: f64,
    modes: Vec<Mode>,
}

impl FourierSM {
    pub fn new(
        profile: CoefficientProfile,
        signs: RademacherSequence,
        truncation: TruncationPolicy,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("horizon {horizon} must be positive")));
        }
        if truncation.max_index == 0 {
            return Err(Error::domain("max_index must be positive"));
        }
        let mut sm = Self {
            profile,
            signs,
            truncation,
            horizon,
            modes: Vec::new(),
        };
        let tail = sm.interval_tail_bound();
        if tail > truncation.tail_bound_budget {
            return Err(Error::Resource(format!(
                "tail bound {tail:.3e} exceeds budget {:.3e}; raise max_index",
                truncation.tail_bound_budget
            )));
        }
        let count = sm.profile.count_up_to(truncation.max_index);
        if count > (1 << 28) {
            return Err(Error::Resource(format!("{count} active modes")));
        }
        let mut modes = Vec::with_capacity(count as usize);
        for (m, n) in sm.profile.clipped(truncation.max_index) {
            let signs = sm.signs.signs(m, n);
            modes.extend((m..=n).zip(signs).map(|(i, s)| Mode {
                freq: i as f64,
                coeff: s / i as f64,
            }));
        }
        sm.modes = modes;
        Ok(sm)
    }

    /// Finite-profile measure on `[0, 2π]` with the default policy.
    pub fn with_seed(profile: CoefficientProfile, seed: u64) -> Result<Self> {
        Self::new(
            profile,
            RademacherSequence::new(seed),
            TruncationPolicy::default(),
            DEFAULT_HORIZON,
        )
    }

    pub fn profile(&self) -> &CoefficientProfile {
        &self.profile
    }

    pub fn signs(&self) -> RademacherSequence {
        self.signs
    }

    pub fn truncation(&self) -> TruncationPolicy {
        self.truncation
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// The same measure with all signs negated.
    pub fn negated(&self) -> Self {
        Self {
            signs: self.signs.negated(),
            modes: self
                .modes
                .iter()
                .map(|m| Mode {
                    coeff: -m.coeff,
                    ..*m
                })
                .collect(),
            ..self.clone()
        }
    }

    fn is_truncated(&self) -> bool {
        self.profile.extends_beyond(self.truncation.max_index)
    }

    pub fn interval_tail_bound(&self) -> f64 {
        if self.is_truncated() {
            2.0 / (self.truncation.max_index as f64).sqrt()
        } else {
            0.0
        }
    }

    pub fn path_tail_bound(&self) -> f64 {
        if self.is_truncated() {
            1.0 / (self.truncation.max_index as f64).sqrt()
        } else {
            0.0
        }
    }

    /// `μ_t = Σ αᵢ εᵢ sin(it)/i` over the retained modes.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for m in &self.modes {
            acc.push(m.coeff * (m.freq * t).sin());
        }
        acc.value()
    }

    /// `μ((a, b])`.
    pub fn measure_of_interval(&self, a: f64, b: f64) -> Result<IntervalMeasure> {
        if !(a.is_finite() && b.is_finite()) || a > b {
            return Err(Error::domain(format!("invalid interval ({a}, {b}]")));
        }
        if a < 0.0 || b > self.horizon {
            return Err(Error::domain(format!(
                "interval ({a}, {b}] leaves [0, {}]",
                self.horizon
            )));
        }
        let mut acc = NeumaierSum::new();
        for m in &self.modes {
            acc.push(m.coeff * ((m.freq * b).sin() - (m.freq * a).sin()));
        }
        Ok(IntervalMeasure {
            value: acc.value(),
            tail_bound: self.interval_tail_bound(),
        })
    }

    /// `μ_{t_k}` on `grid`, which must lie inside `[0, T₁]`.
    pub fn sample_path(&self, grid: GridSpec) -> Result<SampledPath> {
        let grid = GridSpec::new(grid.t0, grid.dt, grid.points)?;
        let slack = 1e-12 * self.horizon;
        if grid.t0 < 0.0 || grid.t_end() > self.horizon + slack {
            return Err(Error::domain(format!(
                "grid [{}, {}] leaves [0, {}]",
                grid.t0,
                grid.t_end(),
                self.horizon
            )));
        }
        let values: Vec<f64> = (0..grid.points)
            .into_par_iter()
            .map(|k| self.value_at(grid.time(k)))
            .collect();
        SampledPath::new(grid.t0, grid.dt, values)
    }
}
