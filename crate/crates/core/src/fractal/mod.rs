//! Interval covers of self-similar Cantor sets, Minkowski arithmetic and
//! dimension estimates, generic over [`Scalar`](crate::Scalar).

mod cover;
mod dimension;
mod ifs;

pub use cover::{Interval, IntervalCover};
pub use dimension::{
    box_count, box_dimension_fit, choose_n, similarity_dimension, ChooseN, DimensionEstimate,
    DimensionMethod,
};
pub use ifs::{attractor_cover, AffineMap, SimilarIfs, DEFAULT_COVER_CAP};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FractalError {
    #[error("OVERLAPPING_IFS: hull images overlap")]
    OverlappingIfs,
    #[error("size guard: {count} intervals exceeds cap {cap}")]
    SizeGuard { count: usize, cap: usize },
    #[error("DIM_TOO_LARGE: dimension bound {0} is not in [0,1)")]
    DimTooLarge(String),
    #[error("invalid IFS: {0}")]
    InvalidIfs(String),
    #[error("empty depth range")]
    EmptyRange,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MinkowskiOp {
    Sum,
    Diff,
}

/// Outer cover of `A + B` or `A - B`, merged.
pub fn minkowski<T: Scalar>(
    a: &IntervalCover<T>,
    op: MinkowskiOp,
    b: &IntervalCover<T>,
    cap: usize,
) -> Result<IntervalCover<T>, FractalError> {
    let count = a.len().saturating_mul(b.len());
    if count > cap {
        return Err(FractalError::SizeGuard { count, cap });
    }
    let mut out = Vec::with_capacity(count);
    for x in a.intervals() {
        for y in b.intervals() {
            out.push(match op {
                MinkowskiOp::Sum => Interval { lo: x.lo.clone() + y.lo.clone(), hi: x.hi.clone() + y.hi.clone() },
                MinkowskiOp::Diff => Interval { lo: x.lo.clone() - y.hi.clone(), hi: x.hi.clone() - y.lo.clone() },
            });
        }
    }
    Ok(IntervalCover::from_intervals(out, a.depth.max(b.depth)))
}

pub fn cover_contains<T: Scalar>(c: &IntervalCover<T>, x: &T) -> bool {
    c.contains(x)
}

pub fn covers_disjoint<T: Scalar>(a: &IntervalCover<T>, b: &IntervalCover<T>) -> bool {
    a.disjoint(b)
}

/// Smith–Volterra–Cantor style set: at stage `n ≥ 1` remove an open middle
/// piece of length `4^{-n}` from each of the `2^{n-1}` remaining intervals.
/// The limit has length 1/2.
pub fn smith_volterra_cover<T: Scalar>(stages: usize) -> IntervalCover<T> {
    let mut ivs = vec![Interval::<T>::unit()];
    let mut gap = T::one();
    for _ in 0..stages {
        gap = gap / T::from_int(4);
        ivs = ivs
            .into_iter()
            .flat_map(|iv| {
                let mid = iv.mid();
                let half = gap.half();
                [
                    Interval { lo: iv.lo.clone(), hi: mid.clone() - half.clone() },
                    Interval { lo: mid + half, hi: iv.hi },
                ]
            })
            .collect();
    }
    IntervalCover::from_intervals(ivs, stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn minkowski_examples() {
        let unit = IntervalCover::single(Interval::<Rational>::unit());
        let d = minkowski(&unit, MinkowskiOp::Diff, &unit, 10).unwrap();
        assert_eq!(d.intervals(), &[Interval::new(q(-1, 1), q(1, 1))]);
        let two = IntervalCover::from_intervals(
            vec![Interval::new(q(0, 1), q(1, 10)), Interval::new(q(9, 10), q(1, 1))],
            0,
        );
        let d = minkowski(&two, MinkowskiOp::Diff, &two, 10).unwrap();
        assert_eq!(
            d.intervals(),
            &[
                Interval::new(q(-1, 1), q(-8, 10)),
                Interval::new(q(-1, 10), q(1, 10)),
                Interval::new(q(8, 10), q(1, 1))
            ]
        );
        let shift = IntervalCover::single(Interval::point(q(1, 3)));
        assert_eq!(minkowski(&two, MinkowskiOp::Sum, &shift, 10).unwrap(), two.translate(&q(1, 3)));
        assert!(minkowski(&two, MinkowskiOp::Sum, &two, 3).is_err());
    }

    #[test]
    fn smith_volterra_lengths() {
        let c = smith_volterra_cover::<Rational>(3);
        assert_eq!(c.len(), 8);
        // 1 - 1/4 - 2/16 - 4/64
        assert_eq!(c.total_length(), q(9, 16));
        assert!(c.contains(&q(0, 1)) && !c.contains(&q(1, 2)));
    }
}
