use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper end marking an interval that runs to infinity.
pub const UNBOUNDED: u64 = u64::MAX;

/// The `{0, 1}` coefficient sequence `α` as sorted, disjoint integer blocks
/// `[m, n]`.
///
/// Serialises as a JSON array of `[m, n]` pairs. A last block ending at
/// [`UNBOUNDED`] switches on every index from `m` onwards.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u64, u64)>", into = "Vec<(u64, u64)>")]
pub struct CoefficientProfile {
    intervals: Vec<(u64, u64)>,
}

impl CoefficientProfile {
    pub fn new(intervals: Vec<(u64, u64)>) -> Result<Self> {
        for (k, &(m, n)) in intervals.iter().enumerate() {
            if m == 0 {
                return Err(Error::domain("profile indices start at 1"));
            }
            if m > n {
                return Err(Error::domain(format!("interval [{m}, {n}] has m > n")));
            }
            if let Some(&(_, prev_n)) = k.checked_sub(1).map(|p| &intervals[p]) {
                if prev_n >= m {
                    return Err(Error::domain(format!(
                        "intervals must be disjoint and ascending (block {k} starts at {m} \
                         after one ending at {prev_n})"
                    )));
                }
            }
        }
        Ok(Self { intervals })
    }

    /// `α ≡ 0`.
    pub fn empty() -> Self {
        Self::default()
    }

    /// `αᵢ = 1` for every `i ≥ 1`.
    pub fn full() -> Self {
        Self {
            intervals: vec![(1, UNBOUNDED)],
        }
    }

    /// A single block `[m, n]`.
    pub fn block(m: u64, n: u64) -> Result<Self> {
        Self::new(vec![(m, n)])
    }

    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.intervals.last().is_none_or(|&(_, n)| n != UNBOUNDED)
    }

    /// Largest active index, `None` for empty or unbounded profiles.
    pub fn max_index(&self) -> Option<u64> {
        match self.intervals.last() {
            Some(&(_, n)) if n != UNBOUNDED => Some(n),
            _ => None,
        }
    }

    /// `αᵢ`.
    pub fn contains(&self, i: u64) -> bool {
        let idx = self.intervals.partition_point(|&(_, n)| n < i);
        self.intervals.get(idx).is_some_and(|&(m, _)| m <= i)
    }

    /// True when some active index exceeds `max`.
    pub fn extends_beyond(&self, max: u64) -> bool {
        self.intervals.last().is_some_and(|&(_, n)| n > max)
    }

    /// Active blocks clipped to `[1, max]`.
    pub fn clipped(&self, max: u64) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.intervals
            .iter()
            .take_while(move |&&(m, _)| m <= max)
            .map(move |&(m, n)| (m, n.min(max)))
    }

    /// Active indices `≤ max` in ascending order.
    pub fn indices_up_to(&self, max: u64) -> impl Iterator<Item = u64> + '_ {
        self.clipped(max).flat_map(|(m, n)| m..=n)
    }

    pub fn count_up_to(&self, max: u64) -> u64 {
        self.clipped(max).map(|(m, n)| n - m + 1).sum()
    }

    /// Appends a block strictly to the right of the current support.
    pub fn push(&mut self, m: u64, n: u64) -> Result<()> {
        let mut intervals = self.intervals.clone();
        intervals.push((m, n));
        *self = Self::new(intervals)?;
        Ok(())
    }

    /// Union with another profile; fails if blocks overlap or touch out of order.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut all: Vec<_> = self.intervals.iter().chain(&other.intervals).copied().collect();
        all.sort_unstable();
        Self::new(all)
    }
}

impl TryFrom<Vec<(u64, u64)>> for CoefficientProfile {
    type Error = Error;

    fn try_from(v: Vec<(u64, u64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CoefficientProfile> for Vec<(u64, u64)> {
    fn from(p: CoefficientProfile) -> Self {
        p.intervals
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_and_reversed() {
        assert!(CoefficientProfile::new(vec![(1, 4), (4, 6)]).is_err());
        assert!(CoefficientProfile::new(vec![(5, 6), (1, 2)]).is_err());
        assert!(CoefficientProfile::new(vec![(3, 2)]).is_err());
        assert!(CoefficientProfile::new(vec![(0, 2)]).is_err());
        assert!(CoefficientProfile::new(vec![(1, 4), (5, 6)]).is_ok());
    }

    #[test]
    fn membership() {
        let p = CoefficientProfile::new(vec![(2, 3), (10, 12)]).unwrap();
        let on: Vec<u64> = (1..=14).filter(|&i| p.contains(i)).collect();
        assert_eq!(on, vec![2, 3, 10, 11, 12]);
        assert_eq!(p.indices_up_to(11).collect::<Vec<_>>(), vec![2, 3, 10, 11]);
        assert_eq!(p.count_up_to(100), 5);
        assert!(p.extends_beyond(11));
        assert!(!p.extends_beyond(12));
        assert!(CoefficientProfile::full().contains(1 << 40));
        assert!(!CoefficientProfile::empty().contains(1));
    }

    #[test]
    fn json_is_array_of_pairs() {
        let p = CoefficientProfile::new(vec![(1, 4), (9, 9)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1,4],[9,9]]");
        let back: CoefficientProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<CoefficientProfile>("[[3,1]]").is_err());
    }
}
