//! Compensated summation and a fixed-shape parallel reduction.

use rayon::prelude::*;
use std::ops::{Add, AddAssign};

/// Kahan-Babuška-Neumaier running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.push(rhs);
    }
}

impl Add for NeumaierSum {
    type Output = NeumaierSum;

    fn add(mut self, rhs: Self) -> Self {
        self.push(rhs.sum);
        self.push(rhs.compensation);
        self
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn neumaier<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Number of indices handled by one leaf of [`chunked_sum`].
pub const CHUNK: u64 = 1 << 15;

/// Compensated sum of `term(i)` over `lo..=hi`.
///
/// The range is split into leaves of [`CHUNK`] indices that are summed in
/// parallel and then combined left to right, so the result does not depend on
/// the number of worker threads.
pub fn chunked_sum<F>(lo: u64, hi: u64, term: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    if hi < lo {
        return 0.0;
    }
    let leaves = (hi - lo) / CHUNK + 1;
    let partials: Vec<NeumaierSum> = (0..leaves)
        .into_par_iter()
        .map(|leaf| {
            let a = lo + leaf * CHUNK;
            let b = (a + CHUNK - 1).min(hi);
            (a..=b).map(&term).collect()
        })
        .collect();
    partials
        .into_iter()
        .fold(NeumaierSum::new(), |acc, p| acc + p)
        .value()
}
