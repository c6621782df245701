use serde::{Deserialize, Serialize};

use super::certificate::{rounding_bound, CertifiedValue, ConstructionFailure, VerificationReport};
use super::parseval::{f_of_eps, qv_block, qv_full};
use crate::error::{Error, Result};
use crate::sm::CoefficientProfile;

const HIGH: f64 = 0.5;
const LOW: f64 = 0.25;
/// Threshold for the old blocks and for the tail at an even `ε`.
const EIGHTH: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator1Budget {
    pub max_index: u64,
    pub min_eps: f64,
}

impl Default for Oscillator1Budget {
    fn default() -> Self {
        Self {
            max_index: 1 << 26,
            min_eps: 2f64.powi(-20),
        }
    }
}

/// Record of a profile `∪[m_k, n_k]` and scales `ε₁ > ε₂ > …` with
/// `f(ε_{2k−1}) > 1/2` and `f(ε_{2k}) < 1/4`.
///
/// `tail_starts[k]` is `m_{k+1}`: every index the construction may still add
/// after pair `k` is at least this large, and `tail_sums[k]` bounds their
/// total contribution at `ε_{2k}` through the closed form of the full series.
/// `even_upper_bounds[k]` is therefore a bound on `f(ε_{2k})` that survives
/// any continuation of the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oscillator1Certificate {
    pub profile: CoefficientProfile,
    pub eps_sequence: Vec<f64>,
    pub f_values: Vec<CertifiedValue>,
    pub tail_starts: Vec<u64>,
    pub tail_sums: Vec<CertifiedValue>,
    pub even_upper_bounds: Vec<CertifiedValue>,
    pub margin: f64,
    pub budget: Oscillator1Budget,
}

impl Oscillator1Certificate {
    /// Number of complete `(ε_{2k−1}, ε_{2k})` pairs.
    pub fn pairs(&self) -> usize {
        self.tail_starts.len()
    }

    /// Recomputes every sum from scratch and rechecks all inequalities.
    pub fn verify(&self) -> Result<VerificationReport> {
        let mut r = VerificationReport::new();
        let eps = &self.eps_sequence;
        r.require(
            "eps strictly decreasing and positive",
            eps.iter().all(|&e| e > 0.0) && eps.windows(2).all(|w| w[1] < w[0]),
        );
        let blocks = self.profile.intervals();
        let k_max = self.pairs();
        r.require(
            "one block per pair",
            blocks.len() >= k_max && eps.len() >= 2 * k_max && self.tail_sums.len() == k_max,
        );
        if !r.passed {
            return Ok(r);
        }
        let max = self.profile.max_index().unwrap_or(1);
        for (j, &e) in eps.iter().enumerate() {
            let (v, err) = f_of_eps(&self.profile, e, max)?;
            let fresh = CertifiedValue::new(v, err);
            if let Some(old) = self.f_values.get(j) {
                r.require(
                    format!("recorded f(eps_{}) reproduced", j + 1),
                    (old.value - v).abs() <= old.error + err,
                );
            }
            if j % 2 == 0 {
                r.above(format!("f(eps_{}) > 1/2", j + 1), fresh, HIGH);
            } else {
                r.below(format!("f(eps_{}) < 1/4", j + 1), fresh, LOW);
            }
        }
        for k in 0..k_max {
            let m_next = self.tail_starts[k];
            let (_, n_k) = blocks[k];
            let later_ok = blocks.get(k + 1).is_none_or(|&(m, _)| m >= m_next);
            r.require(format!("m_{} beyond block {}", k + 2, k + 1), m_next > n_k && later_ok);
            let e = eps[2 * k + 1];
            let tail = certified_tail(m_next, e);
            r.below(format!("tail from m_{} at eps_{}", k + 2, 2 * k + 2), tail, EIGHTH);
            let head = head_blocks(&blocks[..=k], e);
            let upper = CertifiedValue::new(head.value + tail.value, head.error + tail.error);
            r.below(format!("f(eps_{}) < 1/4 for any continuation", 2 * k + 2), upper, LOW);
        }
        Ok(r)
    }
}

/// Smallest `n ∈ [lo, max]` with `pred(n)`, for `pred` monotone in `n`.
/// Doubles the offset from `lo` and then bisects.
fn first_true(lo: u64, max: u64, pred: impl Fn(u64) -> bool) -> Option<u64> {
    if lo > max {
        return None;
    }
    if pred(lo) {
        return Some(lo);
    }
    let (mut bad, mut width) = (lo, 1u64);
    let mut good = loop {
        let n = lo.saturating_add(width).min(max);
        if pred(n) {
            break n;
        }
        if n == max {
            return None;
        }
        bad = n;
        width = width.saturating_mul(2);
    };
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if pred(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

fn certified_block(m: u64, n: u64, eps: f64) -> CertifiedValue {
    let v = qv_block(m, n, eps);
    CertifiedValue::new(v, rounding_bound(v, n - m + 1))
}

/// `Σ_{i<m}` over all indices, via the closed form of the full series.
fn certified_head(m: u64, eps: f64) -> CertifiedValue {
    if m <= 1 {
        return CertifiedValue::new(0.0, 0.0);
    }
    certified_block(1, m - 1, eps)
}

/// `Σ_{i≥m} = (2π − ε)/8 − Σ_{i<m}`.
fn certified_tail(m: u64, eps: f64) -> CertifiedValue {
    let head = certified_head(m, eps);
    let full = qv_full(eps);
    CertifiedValue::new(full - head.value, head.error + rounding_bound(full, 1))
}

fn head_blocks(blocks: &[(u64, u64)], eps: f64) -> CertifiedValue {
    blocks.iter().fold(CertifiedValue::new(0.0, 0.0), |acc, &(m, n)| {
        let b = certified_block(m, n, eps);
        CertifiedValue::new(acc.value + b.value, acc.error + b.error)
    })
}

struct Builder {
    cert: Oscillator1Certificate,
    blocks: Vec<(u64, u64)>,
}

impl Builder {
    fn fail(mut self, msg: String) -> ConstructionFailure<Oscillator1Certificate> {
        let error = Error::Resource(msg);
        // Keep complete pairs only.
        let pairs = self.cert.pairs();
        self.blocks.truncate(pairs);
        self.cert.eps_sequence.truncate(2 * pairs);
        match self.finish() {
            Ok(partial) => ConstructionFailure { error, partial },
            Err(e) => ConstructionFailure {
                error: e,
                partial: self.cert,
            },
        }
    }

    fn finish(&mut self) -> Result<Oscillator1Certificate> {
        self.cert.profile = CoefficientProfile::new(self.blocks.clone())?;
        let max = self.cert.profile.max_index().unwrap_or(1);
        self.cert.f_values = self
            .cert
            .eps_sequence
            .iter()
            .map(|&e| f_of_eps(&self.cert.profile, e, max).map(|(v, err)| CertifiedValue::new(v, err)))
            .collect::<Result<_>>()?;
        Ok(self.cert.clone())
    }

    /// Halves `eps` until `pred` holds.
    fn shrink(&self, mut eps: f64, what: &str, pred: impl Fn(f64) -> bool) -> std::result::Result<f64, String> {
        loop {
            eps *= 0.5;
            if eps < self.cert.budget.min_eps {
                return Err(format!("{what}: eps fell below {:e}", self.cert.budget.min_eps));
            }
            if pred(eps) {
                return Ok(eps);
            }
        }
    }
}

/// Greedy construction with the default budget.
pub fn construct_oscillator1(
    depth: usize,
    margin: f64,
) -> std::result::Result<Oscillator1Certificate, ConstructionFailure<Oscillator1Certificate>> {
    construct_oscillator1_with(depth, margin, Oscillator1Budget::default())
}

/// Builds `depth` oscillation pairs.
///
/// Starting from `m₁ = 1`, `ε₁ = 1`, each round grows `n_k` until the new
/// block alone exceeds `1/2 + margin` at `ε_{2k−1}`, halves `ε` until all
/// blocks so far sum below `1/8 − margin`, picks `m_{k+1}` so the sum over
/// `i ≥ m_{k+1}` is below `1/8 − margin`, and halves `ε` once more until the
/// sum over `i < m_{k+1}` is small enough that the remaining series still
/// exceeds `1/2 + margin`.
pub fn construct_oscillator1_with(
    depth: usize,
    margin: f64,
    budget: Oscillator1Budget,
) -> std::result::Result<Oscillator1Certificate, ConstructionFailure<Oscillator1Certificate>> {
    let mut b = Builder {
        cert: Oscillator1Certificate {
            profile: CoefficientProfile::empty(),
            eps_sequence: Vec::new(),
            f_values: Vec::new(),
            tail_starts: Vec::new(),
            tail_sums: Vec::new(),
            even_upper_bounds: Vec::new(),
            margin,
            budget,
        },
        blocks: Vec::new(),
    };
    if depth == 0 || !(margin > 0.0 && margin < EIGHTH) {
        let error = Error::domain("need depth ≥ 1 and 0 < margin < 1/8");
        return Err(ConstructionFailure { error, partial: b.cert });
    }
    let max = budget.max_index;
    let head_target = (2.0 * std::f64::consts::PI - 1.0) / 8.0 - HIGH - margin;
    let (mut m, mut eps) = (1u64, 1.0f64);

    for k in 1..=depth {
        b.cert.eps_sequence.push(eps);
        let Some(n) = first_true(m, max, |n| certified_block(m, n, eps).certainly_above(HIGH + margin)) else {
            return Err(b.fail(format!("n_{k}: block from {m} never exceeds 1/2 within index {max}")));
        };
        b.blocks.push((m, n));

        let old = b.blocks.clone();
        let eps_even = match b.shrink(eps, &format!("eps_{}", 2 * k), |e| {
            head_blocks(&old, e).certainly_below(EIGHTH - margin)
        }) {
            Ok(e) => e,
            Err(msg) => return Err(b.fail(msg)),
        };
        b.cert.eps_sequence.push(eps_even);

        let Some(m_next) = first_true(n + 1, max, |j| certified_tail(j, eps_even).certainly_below(EIGHTH - margin))
        else {
            return Err(b.fail(format!("m_{}: tail never drops below 1/8 within index {max}", k + 1)));
        };
        let tail = certified_tail(m_next, eps_even);
        let head = head_blocks(&b.blocks, eps_even);
        b.cert.tail_starts.push(m_next);
        b.cert.tail_sums.push(tail);
        b.cert
            .even_upper_bounds
            .push(CertifiedValue::new(head.value + tail.value, head.error + tail.error));

        if k < depth {
            eps = match b.shrink(eps_even, &format!("eps_{}", 2 * k + 1), |e| {
                certified_head(m_next, e).certainly_below(head_target)
            }) {
                Ok(e) => e,
                Err(msg) => return Err(b.fail(msg)),
            };
            m = m_next;
        }
    }
    b.finish().map_err(|error| ConstructionFailure {
        error,
        partial: b.cert.clone(),
    })
}
