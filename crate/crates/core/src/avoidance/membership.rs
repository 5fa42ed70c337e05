use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::AvoidError;
use crate::fractal::{attractor_cover, minkowski, Interval, IntervalCover, MinkowskiOp, SimilarIfs, DEFAULT_COVER_CAP};
use crate::scalar::Scalar;

/// Inverse-map steps tried by [`in_attractor`] before giving up.
pub const DESCENT_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Exact {
    In,
    Out,
    Unknown,
}

/// Exact attractor membership by digit descent: `x ∈ K` iff some map's image
/// of the hull contains `x` and the preimage is again in `K`. A preimage chain
/// that returns to a value already on it closes a cycle of the inverse maps,
/// and every point on such a cycle lies in `K`.
pub fn in_attractor<T: Scalar>(ifs: &SimilarIfs<T>, x: &T, cap: usize) -> Exact {
    let hull = ifs.hull();
    let images: Vec<Interval<T>> = ifs.maps().iter().map(|m| hull.affine(&m.ratio, &m.offset)).collect();
    if !hull.contains(x) {
        return Exact::Out;
    }
    // Depth-first over (value, next map to try); `path` holds the values on
    // the current chain, `dead` values already shown to lead nowhere.
    let mut path: Vec<(T, usize)> = vec![(x.clone(), 0)];
    let mut dead: Vec<T> = Vec::new();
    let mut steps = 0usize;
    let mut capped = false;
    while let Some((v, next)) = path.last().cloned() {
        let Some(i) = (next..images.len()).find(|&i| images[i].contains(&v)) else {
            dead.push(v);
            path.pop();
            continue;
        };
        path.last_mut().expect("nonempty").1 = i + 1;
        let pre = ifs.maps()[i].invert(&v);
        if path.iter().any(|(u, _)| *u == pre) {
            return Exact::In;
        }
        if dead.contains(&pre) {
            continue;
        }
        steps += 1;
        if steps > cap || path.len() > cap {
            capped = true;
            path.last_mut().expect("nonempty").1 = images.len();
            continue;
        }
        path.push((pre, 0));
    }
    if capped { Exact::Unknown } else { Exact::Out }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TupleVerdict<T> {
    /// Every `x_i - t` lies in `K'`, checked exactly.
    Covered { witness: T },
    /// The depth-`d` covers of the `x_i - K'` have no common point.
    DisjointCertified { depth: usize },
    Unknown { depth: usize },
}

impl<T: Scalar> Serialize for TupleVerdict<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut m = serializer.serialize_map(Some(2))?;
        match self {
            TupleVerdict::Covered { witness } => {
                m.serialize_entry("verdict", "COVERED")?;
                m.serialize_entry("witness", &witness.to_text())?;
            }
            TupleVerdict::DisjointCertified { depth } => {
                m.serialize_entry("verdict", "DISJOINT_CERTIFIED")?;
                m.serialize_entry("depth", depth)?;
            }
            TupleVerdict::Unknown { depth } => {
                m.serialize_entry("verdict", "UNKNOWN")?;
                m.serialize_entry("depth", depth)?;
            }
        }
        m.end()
    }
}

/// `xs ∈ F_N` iff the sets `x_i - K'` share a point `t`.
///
/// Witnesses tried, in order: `t = 0`, then the endpoints of the common cover
/// intersection (each is `x_j` minus a point of `K'`).
pub fn fn_membership<T: Scalar>(
    xs: &[T],
    k_prime: &SimilarIfs<T>,
    depth: usize,
) -> Result<TupleVerdict<T>, AvoidError> {
    if xs.is_empty() {
        return Err(AvoidError::Precondition("empty tuple".into()));
    }
    let cover = attractor_cover(k_prime, depth, DEFAULT_COVER_CAP)?;
    let neg = cover.negate();
    let common = xs[1..]
        .iter()
        .fold(neg.translate(&xs[0]), |acc, x| acc.intersect(&neg.translate(x)));
    if common.is_empty() {
        return Ok(TupleVerdict::DisjointCertified { depth });
    }
    let candidates = std::iter::once(T::zero())
        .filter(|z| common.contains(z))
        .chain(common.intervals().iter().take(64).flat_map(|iv| [iv.lo.clone(), iv.hi.clone()]));
    for t in candidates {
        if xs.iter().all(|x| in_attractor(k_prime, &(x.clone() - t.clone()), DESCENT_CAP) == Exact::In) {
            return Ok(TupleVerdict::Covered { witness: t });
        }
    }
    Ok(TupleVerdict::Unknown { depth })
}

/// Outer cover of `(I ∩ P) - K'` at the given depth.
pub(crate) fn shadow<T: Scalar>(
    iv: &Interval<T>,
    p: &IntervalCover<T>,
    k_cover: &IntervalCover<T>,
) -> Result<IntervalCover<T>, AvoidError> {
    Ok(minkowski(&p.clip(iv), MinkowskiOp::Diff, k_cover, DEFAULT_COVER_CAP)?)
}

/// `∏ (I_i ∩ P)` misses `F_N`, certified when the covers of `(I_i ∩ P) - K'`
/// have no common point. `false` means "not certified at this depth".
pub fn product_avoids_fn<T: Scalar>(
    is: &[Interval<T>],
    p: &IntervalCover<T>,
    k_prime: &SimilarIfs<T>,
    depth: usize,
) -> Result<bool, AvoidError> {
    let k_cover = attractor_cover(k_prime, depth, DEFAULT_COVER_CAP)?;
    product_avoids_with(is, p, &k_cover)
}

pub(crate) fn product_avoids_with<T: Scalar>(
    is: &[Interval<T>],
    p: &IntervalCover<T>,
    k_cover: &IntervalCover<T>,
) -> Result<bool, AvoidError> {
    let mut acc: Option<IntervalCover<T>> = None;
    for iv in is {
        let s = shadow(iv, p, k_cover)?;
        let next = match acc {
            None => s,
            Some(a) => a.intersect(&s),
        };
        if next.is_empty() {
            return Ok(true);
        }
        acc = Some(next);
    }
    Ok(is.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn k05() -> SimilarIfs<Rational> {
        SimilarIfs::digits(10, &[0, 5])
    }

    #[test]
    fn exact_membership() {
        let k = k05();
        for x in [q(0, 1), q(1, 2), q(5, 9), q(1, 18), q(11, 20)] {
            assert_eq!(in_attractor(&k, &x, DESCENT_CAP), Exact::In, "{x}");
        }
        for x in [q(1, 4), q(3, 10), q(-1, 10), q(2, 3)] {
            assert_eq!(in_attractor(&k, &x, DESCENT_CAP), Exact::Out, "{x}");
        }
        let third = SimilarIfs::<Rational>::digits(3, &[0, 2]);
        assert_eq!(in_attractor(&third, &q(1, 4), DESCENT_CAP), Exact::In);
        assert_eq!(in_attractor(&third, &q(1, 3), DESCENT_CAP), Exact::In);
        assert_eq!(in_attractor(&third, &q(1, 2), DESCENT_CAP), Exact::Out);
        assert_eq!(in_attractor(&k, &q(1, 2), 0), Exact::Unknown);
    }

    #[test]
    fn fn_examples() {
        let k = k05();
        assert_eq!(fn_membership(&[q(0, 1), q(1, 2)], &k, 3).unwrap(), TupleVerdict::Covered { witness: q(0, 1) });
        assert_eq!(
            fn_membership(&[q(0, 1), q(1, 4)], &k, 4).unwrap(),
            TupleVerdict::DisjointCertified { depth: 4 }
        );
        assert_eq!(fn_membership(&[q(1, 2)], &k, 2).unwrap(), TupleVerdict::Covered { witness: q(0, 1) });
        // A single point outside K' is still coverable by shifting.
        match fn_membership(&[q(3, 10)], &k, 3).unwrap() {
            TupleVerdict::Covered { witness } => {
                assert_eq!(in_attractor(&k, &(q(3, 10) - witness), DESCENT_CAP), Exact::In)
            }
            v => panic!("{v:?}"),
        }
        assert!(fn_membership::<Rational>(&[], &k, 2).is_err());
    }

    #[test]
    fn product_examples() {
        let k = k05();
        let p = IntervalCover::single(Interval::unit());
        let a = Interval::new(q(0, 1), q(1, 100));
        let b = Interval::new(q(30, 100), q(31, 100));
        assert!(product_avoids_fn(&[a.clone(), b], &p, &k, 5).unwrap());
        assert!(!product_avoids_fn(&[a.clone(), a.clone()], &p, &k, 8).unwrap());
        assert!(!product_avoids_fn(&[a], &p, &k, 8).unwrap());
        // Outside P the product is empty.
        let off = Interval::new(q(2, 1), q(3, 1));
        assert!(product_avoids_fn(&[off.clone(), off], &p, &k, 1).unwrap());
    }

    #[test]
    fn works_on_floats() {
        let k = SimilarIfs::<f64>::digits(10, &[0, 5]);
        assert_eq!(fn_membership(&[0.0, 0.5], &k, 3).unwrap(), TupleVerdict::Covered { witness: 0.0 });
        assert!(matches!(fn_membership(&[0.0, 0.25], &k, 4).unwrap(), TupleVerdict::DisjointCertified { .. }));
    }
}
