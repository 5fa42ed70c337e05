use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cover::{Interval, IntervalCover};
use super::FractalError;
use crate::scalar::{max_of, min_of, Scalar};

/// Default interval-count cap for covers built here.
pub const DEFAULT_COVER_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<T> {
    pub ratio: T,
    pub offset: T,
}

impl<T: Scalar> AffineMap<T> {
    pub fn apply(&self, x: &T) -> T {
        self.ratio.clone() * x.clone() + self.offset.clone()
    }

    pub fn invert(&self, y: &T) -> T {
        (y.clone() - self.offset.clone()) / self.ratio.clone()
    }

    pub fn fixpoint(&self) -> T {
        self.offset.clone() / (T::one() - self.ratio.clone())
    }
}

/// Contracting similarities `x ↦ r·x + c` with `0 < r < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarIfs<T> {
    maps: Vec<AffineMap<T>>,
}

impl<T: Scalar> SimilarIfs<T> {
    pub fn new(maps: Vec<(T, T)>) -> Result<Self, FractalError> {
        if maps.is_empty() {
            return Err(FractalError::InvalidIfs("no maps".into()));
        }
        for (r, _) in &maps {
            if !(r > &T::zero() && r < &T::one()) {
                return Err(FractalError::InvalidIfs(format!("ratio {r} not in (0,1)")));
            }
        }
        Ok(SimilarIfs { maps: maps.into_iter().map(|(ratio, offset)| AffineMap { ratio, offset }).collect() })
    }

    /// Maps `x/b + d/b` for each digit `d`: numbers whose base-`b` digits lie in `digits`.
    pub fn digits(b: i64, digits: &[i64]) -> Self {
        let r = T::from_ratio(1, b);
        Self::new(digits.iter().map(|&d| (r.clone(), T::from_ratio(d, b))).collect())
            .expect("digit IFS is valid")
    }

    /// Middle-`α` Cantor set on `[0,1]`: two maps of ratio `(1-α)/2`.
    pub fn middle(alpha: T) -> Result<Self, FractalError> {
        let r = (T::one() - alpha).half();
        Self::new(vec![(r.clone(), T::zero()), (r.clone(), T::one() - r)])
    }

    pub fn maps(&self) -> &[AffineMap<T>] {
        &self.maps
    }

    /// Smallest interval mapped into itself: spanned by the extreme fixpoints.
    pub fn hull(&self) -> Interval<T> {
        let mut lo = self.maps[0].fixpoint();
        let mut hi = lo.clone();
        for m in &self.maps[1..] {
            let p = m.fixpoint();
            lo = min_of(&lo, &p);
            hi = max_of(&hi, &p);
        }
        Interval { lo, hi }
    }

    /// Images of the hull have pairwise disjoint interiors.
    pub fn non_overlapping(&self) -> bool {
        let hull = self.hull();
        let mut images: Vec<Interval<T>> =
            self.maps.iter().map(|m| hull.affine(&m.ratio, &m.offset)).collect();
        images.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("comparable"));
        images.windows(2).all(|w| w[0].hi <= w[1].lo)
    }

    pub fn ratios_f64(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio.to_f64_lossy()).collect()
    }

    pub fn min_ratio(&self) -> T {
        self.maps.iter().skip(1).fold(self.maps[0].ratio.clone(), |a, m| min_of(&a, &m.ratio))
    }

    pub fn ratio_sum(&self) -> T {
        self.maps.iter().fold(T::zero(), |a, m| a + m.ratio.clone())
    }
}

/// Union of all `depth`-fold compositions applied to the hull.
pub fn attractor_cover<T: Scalar>(
    ifs: &SimilarIfs<T>,
    depth: usize,
    cap: usize,
) -> Result<IntervalCover<T>, FractalError> {
    let mut cover = IntervalCover::single(ifs.hull());
    for d in 1..=depth {
        let count = cover.len().saturating_mul(ifs.maps.len());
        if count > cap {
            return Err(FractalError::SizeGuard { count, cap });
        }
        let next = ifs
            .maps
            .iter()
            .flat_map(|m| cover.intervals().iter().map(move |iv| iv.affine(&m.ratio, &m.offset)))
            .collect();
        cover = IntervalCover::from_intervals(next, d);
    }
    cover.depth = depth;
    Ok(cover)
}

impl<T: Scalar> fmt::Display for SimilarIfs<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.maps.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{},{}", m.ratio.to_text(), m.offset.to_text())?;
        }
        Ok(())
    }
}

/// `"ratio,offset;ratio,offset;…"`.
impl<T: Scalar> FromStr for SimilarIfs<T> {
    type Err = FractalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut maps = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (r, c) = part
                .split_once(',')
                .ok_or_else(|| FractalError::Parse(format!("expected ratio,offset in {part:?}")))?;
            let p = |x: &str| T::parse_text(x).ok_or_else(|| FractalError::Parse(format!("bad number {x:?}")));
            maps.push((p(r)?, p(c)?));
        }
        SimilarIfs::new(maps)
    }
}

impl<T: Scalar> Serialize for SimilarIfs<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SimilarIfs<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}
