use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FractalError;
use crate::scalar::{max_of, min_of, Scalar};

/// Closed interval `[lo, hi]`, `lo ≤ hi`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        assert!(lo <= hi, "interval with lo > hi");
        Interval { lo, hi }
    }

    pub fn point(x: T) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn unit() -> Self {
        Interval { lo: T::zero(), hi: T::one() }
    }

    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn mid(&self) -> T {
        (self.lo.clone() + self.hi.clone()).half()
    }

    pub fn contains(&self, x: &T) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed intervals: a shared endpoint counts as meeting.
    pub fn meets(&self, other: &Interval<T>) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn interiors_meet(&self, other: &Interval<T>) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn intersect(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = max_of(&self.lo, &other.lo);
        let hi = min_of(&self.hi, &other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn translate(&self, t: &T) -> Interval<T> {
        Interval { lo: self.lo.clone() + t.clone(), hi: self.hi.clone() + t.clone() }
    }

    /// Image under `x ↦ ratio·x + offset` with `ratio > 0`.
    pub fn affine(&self, ratio: &T, offset: &T) -> Interval<T> {
        Interval {
            lo: ratio.clone() * self.lo.clone() + offset.clone(),
            hi: ratio.clone() * self.hi.clone() + offset.clone(),
        }
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.to_text(), self.hi.to_text())
    }
}

/// Sorted, pairwise disjoint closed intervals (touching ones are merged).
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalCover<T> {
    intervals: Vec<Interval<T>>,
    pub depth: usize,
}

impl<T: Scalar> IntervalCover<T> {
    pub fn empty() -> Self {
        IntervalCover { intervals: Vec::new(), depth: 0 }
    }

    pub fn from_intervals(mut intervals: Vec<Interval<T>>, depth: usize) -> Self {
        intervals.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("comparable endpoints"));
        let mut merged: Vec<Interval<T>> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalCover { intervals: merged, depth }
    }

    pub fn single(iv: Interval<T>) -> Self {
        IntervalCover { intervals: vec![iv], depth: 0 }
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn hull(&self) -> Option<Interval<T>> {
        Some(Interval {
            lo: self.intervals.first()?.lo.clone(),
            hi: self.intervals.last()?.hi.clone(),
        })
    }

    pub fn total_length(&self) -> T {
        self.intervals.iter().fold(T::zero(), |acc, iv| acc + iv.length())
    }

    /// Index of the first interval whose `hi ≥ x`.
    fn lower_bound(&self, x: &T) -> usize {
        self.intervals.partition_point(|iv| &iv.hi < x)
    }

    pub fn contains(&self, x: &T) -> bool {
        self.intervals.get(self.lower_bound(x)).is_some_and(|iv| iv.contains(x))
    }

    pub fn meets_interval(&self, iv: &Interval<T>) -> bool {
        self.intervals.get(self.lower_bound(&iv.lo)).is_some_and(|c| c.meets(iv))
    }

    /// Does some piece overlap the open interior of `iv`?
    pub fn meets_interior(&self, iv: &Interval<T>) -> bool {
        if iv.lo == iv.hi {
            return false;
        }
        let start = self.lower_bound(&iv.lo);
        self.intervals[start..]
            .iter()
            .take_while(|c| c.lo < iv.hi)
            .any(|c| c.hi > iv.lo)
    }

    /// Exact emptiness of the intersection of the two unions.
    pub fn disjoint(&self, other: &IntervalCover<T>) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            let (a, b) = (&self.intervals[i], &other.intervals[j]);
            if a.meets(b) {
                return false;
            }
            if a.hi < b.hi { i += 1 } else { j += 1 }
        }
        true
    }

    pub fn intersect(&self, other: &IntervalCover<T>) -> IntervalCover<T> {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            let (a, b) = (&self.intervals[i], &other.intervals[j]);
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi < b.hi { i += 1 } else { j += 1 }
        }
        IntervalCover::from_intervals(out, self.depth.max(other.depth))
    }

    pub fn clip(&self, iv: &Interval<T>) -> IntervalCover<T> {
        self.intersect(&IntervalCover::single(iv.clone()))
    }

    pub fn union(&self, other: &IntervalCover<T>) -> IntervalCover<T> {
        let all = self.intervals.iter().chain(&other.intervals).cloned().collect();
        IntervalCover::from_intervals(all, self.depth.max(other.depth))
    }

    pub fn translate(&self, t: &T) -> IntervalCover<T> {
        IntervalCover {
            intervals: self.intervals.iter().map(|iv| iv.translate(t)).collect(),
            depth: self.depth,
        }
    }

    /// `{-x : x ∈ self}`.
    pub fn negate(&self) -> IntervalCover<T> {
        IntervalCover {
            intervals: self
                .intervals
                .iter()
                .rev()
                .map(|iv| Interval { lo: -iv.hi.clone(), hi: -iv.lo.clone() })
                .collect(),
            depth: self.depth,
        }
    }

    /// Every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &IntervalCover<T>) -> bool {
        self.intervals.iter().all(|iv| {
            other.intervals.get(other.lower_bound(&iv.lo)).is_some_and(|c| c.contains_interval(iv))
        })
    }

    /// `lo,hi` rows with exact endpoint text.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lo,hi\n");
        for iv in &self.intervals {
            s.push_str(&format!("{},{}\n", iv.lo.to_text(), iv.hi.to_text()));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, FractalError> {
        let mut out = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("lo")) {
                continue;
            }
            let (lo, hi) = line
                .split_once(',')
                .ok_or_else(|| FractalError::Parse(format!("line {}: expected lo,hi", n + 1)))?;
            out.push(parse_interval(lo, hi)?);
        }
        Ok(IntervalCover::from_intervals(out, 0))
    }
}

pub(crate) fn parse_interval<T: Scalar>(lo: &str, hi: &str) -> Result<Interval<T>, FractalError> {
    let p = |s: &str| T::parse_text(s).ok_or_else(|| FractalError::Parse(format!("bad number {s:?}")));
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo > hi {
        return Err(FractalError::Parse(format!("interval [{lo}, {hi}] has lo > hi")));
    }
    Ok(Interval { lo, hi })
}

#[derive(Serialize, Deserialize)]
struct CoverRepr {
    depth: usize,
    intervals: Vec<(String, String)>,
}

impl<T: Scalar> Serialize for IntervalCover<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CoverRepr {
            depth: self.depth,
            intervals: self.intervals.iter().map(|iv| (iv.lo.to_text(), iv.hi.to_text())).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for IntervalCover<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = CoverRepr::deserialize(deserializer)?;
        let ivs = repr
            .intervals
            .iter()
            .map(|(lo, hi)| parse_interval(lo, hi))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(IntervalCover::from_intervals(ivs, repr.depth))
    }
}

impl<T: Scalar> Serialize for Interval<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.lo.to_text(), self.hi.to_text()).serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Interval<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (lo, hi) = <(String, String)>::deserialize(deserializer)?;
        parse_interval(&lo, &hi).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn iv(a: (i64, i64), b: (i64, i64)) -> Interval<Rational> {
        Interval::new(q(a.0, a.1), q(b.0, b.1))
    }

    #[test]
    fn merges_touching_intervals() {
        let c = IntervalCover::from_intervals(vec![iv((1, 2), (1, 1)), iv((0, 1), (1, 2)), iv((2, 1), (3, 1))], 0);
        assert_eq!(c.len(), 2);
        assert_eq!(c.intervals()[0], iv((0, 1), (1, 1)));
    }

    #[test]
    fn contains_and_disjoint() {
        let unit = IntervalCover::single(Interval::<Rational>::unit());
        assert!(unit.contains(&q(1, 2)));
        assert!(!unit.contains(&q(3, 2)));
        let a = IntervalCover::single(iv((0, 1), (1, 3)));
        let b = IntervalCover::single(iv((2, 3), (1, 1)));
        assert!(a.disjoint(&b));
        let c = IntervalCover::single(iv((0, 1), (1, 2)));
        let d = IntervalCover::single(iv((1, 2), (1, 1)));
        assert!(!c.disjoint(&d));
    }

    #[test]
    fn interior_test_ignores_endpoints() {
        let c = IntervalCover::single(iv((0, 1), (1, 2)));
        assert!(!c.meets_interior(&iv((1, 2), (1, 1))));
        assert!(c.meets_interior(&iv((1, 4), (1, 1))));
    }

    #[test]
    fn negate_and_subset() {
        let c = IntervalCover::from_intervals(vec![iv((0, 1), (1, 10)), iv((9, 10), (1, 1))], 1);
        let n = c.negate();
        assert_eq!(n.intervals()[0], iv((-1, 1), (-9, 10)));
        assert!(c.is_subset_of(&IntervalCover::single(Interval::unit())));
        assert!(!IntervalCover::single(Interval::unit()).is_subset_of(&c));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let c = IntervalCover::from_intervals(vec![iv((0, 1), (1, 3)), iv((2, 3), (1, 1))], 1);
        assert_eq!(IntervalCover::<Rational>::from_csv(&c.to_csv()).unwrap().intervals(), c.intervals());
        let js = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<IntervalCover<Rational>>(&js).unwrap(), c);
    }
}
