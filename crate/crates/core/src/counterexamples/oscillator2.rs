use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::certificate::{rounding_bound, CertifiedValue, ConstructionFailure, VerificationReport};
use crate::error::{Error, Result};
use crate::sm::{CoefficientProfile, RademacherSequence};
use crate::summation::{chunked_sum, NeumaierSum};

const A_BOUND: f64 = 0.25;
const EB_BOUND: f64 = 1.0 / 16.0;
const S_FLOOR: f64 = 2.0;
/// Finest level for the FFT evaluation of `S_n`.
const MAX_FFT_LEVEL: u32 = 24;
/// Sign chunk used while folding modes onto residues.
const FOLD_CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator2Options {
    /// `n₁`.
    pub first_level: u32,
    /// Extra room demanded below each bound during the search.
    pub slack: f64,
    /// Largest admissible `n_j`; the block at `n` reaches index `2^{n−1} − 1`.
    pub max_level: u32,
}

impl Default for Oscillator2Options {
    fn default() -> Self {
        Self {
            first_level: 2,
            slack: 1e-3,
            max_level: 27,
        }
    }
}

/// Monte Carlo values of `S_ñ` for the final profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalS {
    pub level: u32,
    pub values: Vec<f64>,
    pub fraction_below_one: f64,
}

impl EmpiricalS {
    fn new(level: u32, values: Vec<f64>) -> Self {
        let below = values.iter().filter(|&&s| s < 1.0).count();
        let fraction_below_one = below as f64 / values.len().max(1) as f64;
        Self {
            level,
            values,
            fraction_below_one,
        }
    }
}

/// Record of blocks `[2^{n_j−2}, 2^{n_j−1} − 1]` with `S_{n_j} ≥ 2` and, at the
/// intermediate levels `ñ_j`, `A < 1/4` for the blocks up to `j` and
/// `E[B] < 1/16` for block `j + 1`.
///
/// `levels` holds `n₁ … n_{d+1}`: the block after the last pair is part of
/// the profile because it is what `E[B]` at `ñ_d` refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oscillator2Certificate {
    pub profile: CoefficientProfile,
    pub levels: Vec<u32>,
    pub scale_pairs: Vec<(u32, u32)>,
    #[serde(rename = "S_lower")]
    pub s_lower: Vec<f64>,
    #[serde(rename = "A_values")]
    pub a_values: Vec<f64>,
    #[serde(rename = "EB_values")]
    pub eb_values: Vec<f64>,
    pub empirical: Vec<EmpiricalS>,
    pub seeds: usize,
    pub options: Oscillator2Options,
}

impl Oscillator2Certificate {
    /// Recomputes the deterministic quantities and rechecks their bounds.
    pub fn verify(&self) -> Result<VerificationReport> {
        let mut r = VerificationReport::new();
        let d = self.scale_pairs.len();
        r.require(
            "record lengths consistent",
            self.levels.len() == d + 1
                && self.s_lower.len() == d + 1
                && self.a_values.len() == d
                && self.eb_values.len() == d,
        );
        let mut chain = Vec::with_capacity(2 * d + 1);
        for (j, &(n, nt)) in self.scale_pairs.iter().enumerate() {
            r.require(format!("pair {} starts at n_{}", j + 1, j + 1), self.levels.get(j) == Some(&n));
            chain.extend([n, nt]);
        }
        chain.extend(self.levels.last());
        r.require("n_1 < ñ_1 < n_2 < …", chain.windows(2).all(|w| w[0] < w[1]));
        let blocks: Vec<_> = self.levels.iter().map(|&n| dyadic_block(n)).collect();
        r.require("profile is the union of the level blocks", self.profile.intervals() == blocks.as_slice());
        if !r.passed {
            return Ok(r);
        }
        for (j, &n) in self.levels.iter().enumerate() {
            let s = certified_diag(&blocks[..=j], n)?;
            r.require(format!("S_{} reproduced", n), close(s.value, self.s_lower[j], s.error));
            r.above(format!("S at n_{} = {n} ≥ 2", j + 1), s, S_FLOOR - f64::MIN_POSITIVE);
        }
        for (j, &(_, nt)) in self.scale_pairs.iter().enumerate() {
            let a = certified_diag(&blocks[..=j], nt)?;
            r.require(format!("A at ñ_{} reproduced", j + 1), close(a.value, self.a_values[j], a.error));
            r.below(format!("A at ñ_{} = {nt} < 1/4", j + 1), a, A_BOUND);
            let next = CoefficientProfile::new(vec![blocks[j + 1]])?;
            let eb = expected_b(&next, nt)?;
            let eb = CertifiedValue::new(eb, rounding_bound(eb, count(&next)));
            r.require(format!("E[B] at ñ_{} reproduced", j + 1), close(eb.value, self.eb_values[j], eb.error));
            r.below(format!("E[B] at ñ_{} = {nt} < 1/16", j + 1), eb, EB_BOUND);
        }
        Ok(r)
    }

    /// Reruns the Monte Carlo evaluation and compares it with the record.
    pub fn verify_empirical(&self) -> Result<VerificationReport> {
        let mut r = VerificationReport::new();
        for e in &self.empirical {
            let fresh = empirical_values(&self.profile, e.level, e.values.len())?;
            let same = fresh
                .iter()
                .zip(&e.values)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
            r.require(format!("empirical S at level {} reproduced", e.level), same);
        }
        Ok(r)
    }
}

fn close(a: f64, b: f64, err: f64) -> bool {
    (a - b).abs() <= 2.0 * err + 1e-15 * a.abs()
}

fn count(p: &CoefficientProfile) -> u64 {
    p.count_up_to(u64::MAX - 1)
}

/// `[2^{n−2}, 2^{n−1} − 1]`.
fn dyadic_block(n: u32) -> (u64, u64) {
    (1u64 << (n - 2), (1u64 << (n - 1)) - 1)
}

fn certified_diag(blocks: &[(u64, u64)], n: u32) -> Result<CertifiedValue> {
    let p = CoefficientProfile::new(blocks.to_vec())?;
    let v = diagonal_s(&p, n)?;
    Ok(CertifiedValue::new(v, rounding_bound(v, count(&p))))
}

/// `S_n = Σ_k μ²(Δ_kn) = 2·Σᵢ αᵢ 2ⁿ sin²(iπ/2ⁿ)/i²` over `2ⁿ` equal cells of
/// `[0, 2π]`, exact for every sign realization when all active indices are
/// below `2^{n−1}`.
pub fn diagonal_s(profile: &CoefficientProfile, n: u32) -> Result<f64> {
    if profile.is_empty() {
        return Ok(0.0);
    }
    if !(2..=62).contains(&n) {
        return Err(Error::Precondition(format!("level {n} leaves no room for active modes")));
    }
    let limit = (1u64 << (n - 1)) - 1;
    if profile.extends_beyond(limit) {
        return Err(Error::Precondition(format!(
            "active indices reach 2^{} at level {n}; cross terms would not cancel",
            n - 1
        )));
    }
    let scale = (1u64 << n) as f64;
    let mut acc = NeumaierSum::new();
    for (a, b) in profile.clipped(limit) {
        acc += chunked_sum(a, b, |i| {
            let x = i as f64;
            let s = (x * PI / scale).sin();
            s * s / (x * x)
        });
    }
    Ok(2.0 * scale * acc.value())
}

/// `E[S_n]` for the profile: `Σᵢ Σ_k (∫_{Δ_kn} cos(it) dt)²`, the cross terms
/// vanishing in expectation.
pub fn expected_b(profile: &CoefficientProfile, n: u32) -> Result<f64> {
    if !profile.is_finite() {
        return Err(Error::domain("expected_b needs a finite profile"));
    }
    if n == 0 || n > 62 {
        return Err(Error::domain(format!("level {n} out of range")));
    }
    let cells = 1u64 << n;
    let half = cells / 2;
    let scale = cells as f64;
    let mut acc = NeumaierSum::new();
    for &(a, b) in profile.intervals() {
        acc += chunked_sum(a, b, |i| {
            let x = i as f64;
            let s = (x * PI / scale).sin();
            // Σ_k cos²(i(2k − 1)π/2ⁿ)
            let cos_sq = if i % half == 0 {
                let q = i / half;
                if q.is_multiple_of(2) { scale } else { 0.0 }
            } else {
                0.5 * scale
            };
            4.0 * s * s / (x * x) * cos_sq
        });
    }
    Ok(acc.value())
}

/// `S_n` for one sign realization, from the path on the `2ⁿ + 1` dyadic nodes.
///
/// `μ_{t_k} = Σᵢ εᵢ sin(2π ik/N)/i` depends on `i` only through `i mod N`, so
/// the modes are folded onto `N` residues and the path comes out of one FFT.
pub fn empirical_dyadic_s(profile: &CoefficientProfile, n: u32, seed: u64) -> Result<f64> {
    if !profile.is_finite() {
        return Err(Error::domain("empirical S needs a finite profile"));
    }
    if n == 0 || n > MAX_FFT_LEVEL {
        return Err(Error::Resource(format!("level {n} outside 1..={MAX_FFT_LEVEL}")));
    }
    let cells = 1usize << n;
    let mask = cells as u64 - 1;
    let signs = RademacherSequence::new(seed);
    let mut folded = vec![Complex::new(0.0, 0.0); cells];
    for &(a, b) in profile.intervals() {
        let mut lo = a;
        while lo <= b {
            let hi = b.min(lo + FOLD_CHUNK - 1);
            for (i, s) in (lo..=hi).zip(signs.signs(lo, hi)) {
                folded[(i & mask) as usize].re += s / i as f64;
            }
            lo = hi + 1;
        }
    }
    FftPlanner::new().plan_fft_inverse(cells).process(&mut folded);
    let mut acc = NeumaierSum::new();
    for k in 0..cells {
        let next = folded[(k + 1) % cells].im;
        let d = next - folded[k].im;
        acc += d * d;
    }
    Ok(acc.value())
}

fn empirical_values(profile: &CoefficientProfile, n: u32, seeds: usize) -> Result<Vec<f64>> {
    (0..seeds as u64)
        .into_par_iter()
        .map(|seed| empirical_dyadic_s(profile, n, seed))
        .collect()
}

/// Greedy construction with default options.
pub fn construct_oscillator2(
    depth: usize,
    seeds: usize,
) -> std::result::Result<Oscillator2Certificate, ConstructionFailure<Oscillator2Certificate>> {
    construct_oscillator2_with(depth, seeds, Oscillator2Options::default())
}

/// Builds `depth` pairs `(n_j, ñ_j)`.
///
/// `ñ_j` is the first level above `n_j` where the blocks so far contribute
/// `A < 1/4 − slack`; `n_{j+1}` is the first level above `ñ_j` whose block has
/// `E[B] < 1/16 − slack` at `ñ_j`. Afterwards `S_ñ` is sampled over `seeds`
/// sign realizations of the final profile.
pub fn construct_oscillator2_with(
    depth: usize,
    seeds: usize,
    opts: Oscillator2Options,
) -> std::result::Result<Oscillator2Certificate, ConstructionFailure<Oscillator2Certificate>> {
    let mut cert = Oscillator2Certificate {
        profile: CoefficientProfile::empty(),
        levels: Vec::new(),
        scale_pairs: Vec::new(),
        s_lower: Vec::new(),
        a_values: Vec::new(),
        eb_values: Vec::new(),
        empirical: Vec::new(),
        seeds,
        options: opts,
    };
    if depth == 0 || seeds == 0 || opts.first_level < 2 || opts.max_level > 63 || !(opts.slack >= 0.0) {
        let error = Error::domain("need depth ≥ 1, seeds ≥ 1, first_level ≥ 2, max_level ≤ 63");
        return Err(ConstructionFailure { error, partial: cert });
    }
    match search(&mut cert, depth, opts) {
        Ok(()) => {}
        Err(error) => {
            let _ = sample(&mut cert);
            return Err(ConstructionFailure { error, partial: cert });
        }
    }
    match sample(&mut cert) {
        Ok(()) => Ok(cert),
        Err(error) => Err(ConstructionFailure { error, partial: cert }),
    }
}

fn search(cert: &mut Oscillator2Certificate, depth: usize, opts: Oscillator2Options) -> Result<()> {
    let budget = |what: &str| Error::Resource(format!("{what} would exceed level {}", opts.max_level));
    let mut n = opts.first_level;
    if n > opts.max_level {
        return Err(budget("n_1"));
    }
    let mut blocks = vec![dyadic_block(n)];
    cert.s_lower.push(certified_diag(&blocks, n)?.value);
    cert.levels.push(n);
    cert.profile = CoefficientProfile::new(blocks.clone())?;

    for j in 1..=depth {
        let mut nt = n + 1;
        let a = loop {
            if nt > opts.max_level {
                return Err(budget(&format!("ñ_{j}")));
            }
            let a = certified_diag(&blocks, nt)?;
            if a.certainly_below(A_BOUND - opts.slack) {
                break a;
            }
            nt += 1;
        };
        let mut next = nt + 1;
        let eb = loop {
            if next > opts.max_level {
                return Err(budget(&format!("n_{}", j + 1)));
            }
            let p = CoefficientProfile::new(vec![dyadic_block(next)])?;
            let eb = expected_b(&p, nt)?;
            if CertifiedValue::new(eb, rounding_bound(eb, count(&p))).certainly_below(EB_BOUND - opts.slack) {
                break eb;
            }
            next += 1;
        };
        blocks.push(dyadic_block(next));
        let s = certified_diag(&blocks, next)?;
        if !s.certainly_above(S_FLOOR - f64::MIN_POSITIVE) {
            return Err(Error::Numeric(format!("S at level {next} is {} < 2", s.value)));
        }
        cert.scale_pairs.push((n, nt));
        cert.a_values.push(a.value);
        cert.eb_values.push(eb);
        cert.levels.push(next);
        cert.s_lower.push(s.value);
        cert.profile = CoefficientProfile::new(blocks.clone())?;
        n = next;
    }
    Ok(())
}

fn sample(cert: &mut Oscillator2Certificate) -> Result<()> {
    cert.empirical.clear();
    for &(_, nt) in &cert.scale_pairs {
        let values = empirical_values(&cert.profile, nt, cert.seeds)?;
        cert.empirical.push(EmpiricalS::new(nt, values));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::{dyadic_partition, sum_squared_increments};
    use crate::sm::FourierSM;

    #[test]
    fn diagonal_meets_lower_bound() {
        let (a, b) = dyadic_block(8);
        let p = CoefficientProfile::block(a, b).unwrap();
        assert!(diagonal_s(&p, 8).unwrap() >= 2.0);
        assert_eq!(diagonal_s(&CoefficientProfile::empty(), 5).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_rejects_wide_support() {
        let p = CoefficientProfile::block(1, 32).unwrap();
        assert!(matches!(diagonal_s(&p, 6), Err(Error::Precondition(_))));
        assert!(diagonal_s(&p, 7).is_ok());
    }

    #[test]
    fn diagonal_matches_brute_force() {
        let p = CoefficientProfile::block(1, 4).unwrap();
        let d = diagonal_s(&p, 6).unwrap();
        for seed in 0..4 {
            let sm = FourierSM::with_seed(p.clone(), seed).unwrap();
            let brute = sum_squared_increments(&sm, &dyadic_partition(2.0 * PI, 6).unwrap()).unwrap();
            assert!((d - brute).abs() < 1e-10, "{d} vs {brute}");
        }
    }

    #[test]
    fn fft_matches_brute_force() {
        // Indices above 2^n exercise the folding.
        let p = CoefficientProfile::new(vec![(1, 3), (50, 70), (200, 260)]).unwrap();
        let trunc = crate::sm::TruncationPolicy {
            max_index: 1000,
            ..Default::default()
        };
        for seed in [0, 7] {
            let sm = FourierSM::new(p.clone(), RademacherSequence::new(seed), trunc, 2.0 * PI).unwrap();
            let brute = sum_squared_increments(&sm, &dyadic_partition(2.0 * PI, 6).unwrap()).unwrap();
            let fft = empirical_dyadic_s(&p, 6, seed).unwrap();
            assert!((brute - fft).abs() < 1e-11 * brute.max(1.0), "{brute} vs {fft}");
        }
    }

    #[test]
    fn expected_b_matches_seed_average() {
        let p = CoefficientProfile::new(vec![(16, 40)]).unwrap();
        let exact = expected_b(&p, 5).unwrap();
        let seeds = 4000;
        let mean = (0..seeds).map(|s| empirical_dyadic_s(&p, 5, s).unwrap()).sum::<f64>() / seeds as f64;
        assert!((mean - exact).abs() < 0.05 * exact, "{mean} vs {exact}");
        // Below 2^{n−1} the expectation is the diagonal value.
        let q = CoefficientProfile::block(3, 9).unwrap();
        assert!((expected_b(&q, 6).unwrap() - diagonal_s(&q, 6).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn depth_one_certificate() {
        let c = construct_oscillator2(1, 20).unwrap();
        assert_eq!(c.scale_pairs.len(), 1);
        assert!(c.s_lower.iter().all(|&s| s >= 2.0));
        assert!(c.a_values[0] < 0.25 && c.eb_values[0] < 1.0 / 16.0);
        assert!(c.verify().unwrap().passed);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"S_lower\""));
        let back: Oscillator2Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn budget_overrun_keeps_partial() {
        let opts = Oscillator2Options {
            max_level: 14,
            ..Default::default()
        };
        let e = construct_oscillator2_with(3, 5, opts).unwrap_err();
        assert!(matches!(e.error, Error::Resource(_)));
        assert!(!e.partial.scale_pairs.is_empty());
        assert!(e.partial.verify().unwrap().passed);
    }
}
