//! Finite unions of real intervals, with +/- infinity endpoints allowed.
//!
//! Used for flow hit-times (open intervals), threshold excursions (closed
//! intervals) and gap-set constructions. The set operations identify
//! intervals up to their endpoints, which all consumers here treat as
//! measure zero.

use serde::{Deserialize, Serialize};

/// Sorted, disjoint, nonempty intervals (lo < hi).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        let mut s = Self::empty();
        if lo < hi {
            s.intervals.push((lo, hi));
        }
        s
    }

    /// Normalize an arbitrary collection: drop empty, sort, merge overlaps
    /// and touching endpoints.
    pub fn from_unsorted(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(lo, hi)| lo < hi);
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn min(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv.0)
    }

    pub fn max(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.1)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|(lo, hi)| *lo <= t && t <= *hi)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.intervals.clone();
        raw.extend_from_slice(&other.intervals);
        Self::from_unsorted(raw)
    }

    pub fn intersect_interval(&self, lo: f64, hi: f64) -> IntervalSet {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            let l = a.max(lo);
            let h = b.min(hi);
            if l < h {
                out.push((l, h));
            }
        }
        Self { intervals: out }
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a1, b1) = self.intervals[i];
            let (a2, b2) = other.intervals[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo, hi));
            }
            if b1 <= b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { intervals: out }
    }

    /// Complement of the set inside [lo, hi].
    pub fn complement_within(&self, lo: f64, hi: f64) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = lo;
        for &(a, b) in &self.intervals {
            if b <= lo {
                continue;
            }
            if a >= hi {
                break;
            }
            if a > cursor {
                out.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        Self::from_unsorted(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_measure() {
        let s = IntervalSet::from_unsorted(vec![(0.0, 1.0), (0.5, 2.0), (3.0, 4.0), (5.0, 5.0)]);
        assert_eq!(s.intervals(), &[(0.0, 2.0), (3.0, 4.0)]);
        assert!((s.total_length() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn intersect_and_complement() {
        let a = IntervalSet::from_unsorted(vec![(0.0, 2.0), (3.0, 5.0)]);
        let b = IntervalSet::from_unsorted(vec![(1.0, 4.0)]);
        assert_eq!(a.intersect(&b).intervals(), &[(1.0, 2.0), (3.0, 4.0)]);
        let c = a.complement_within(0.0, 6.0);
        assert_eq!(c.intervals(), &[(2.0, 3.0), (5.0, 6.0)]);
    }

    #[test]
    fn unbounded_endpoints() {
        let s = IntervalSet::single(2.0, f64::INFINITY);
        assert!(s.contains(1e300));
        assert!(!s.contains(1.0));
        let c = s.complement_within(0.0, 10.0);
        assert_eq!(c.intervals(), &[(0.0, 2.0)]);
    }
}
