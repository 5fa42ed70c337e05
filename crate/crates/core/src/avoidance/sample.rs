use serde::Serialize;

use super::AvoidError;
use crate::fractal::{attractor_cover, minkowski, IntervalCover, MinkowskiOp, SimilarIfs, DEFAULT_COVER_CAP};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct SampleSet<T> {
    #[serde(serialize_with = "ser_points")]
    pub points: Vec<T>,
    /// Grid index at which each point was accepted.
    pub steps: Vec<usize>,
    pub depth: usize,
    pub k: SimilarIfs<T>,
    pub exclusion: IntervalCover<T>,
}

fn ser_points<T: Scalar, S: serde::Serializer>(points: &[T], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(points.iter().map(Scalar::to_text))
}

impl<T: Scalar> SampleSet<T> {
    /// `point,step` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,step\n");
        for (x, s) in self.points.iter().zip(&self.steps) {
            out.push_str(&format!("{},{}\n", x.to_text(), s));
        }
        out
    }
}

/// Scans `0, g, 2g, … ≤ 1` and keeps `x` unless it is excluded or `x - y`
/// lies in the depth-`d` cover of `K - K` for an earlier pick `y`.
pub fn greedy_sample<T: Scalar>(
    k: &SimilarIfs<T>,
    m: usize,
    exclusion: &IntervalCover<T>,
    grid: &T,
    depth: usize,
) -> Result<SampleSet<T>, AvoidError> {
    if m == 0 || grid <= &T::zero() {
        return Err(AvoidError::Precondition("need M ≥ 1 and a positive grid step".into()));
    }
    let kc = attractor_cover(k, depth, DEFAULT_COVER_CAP)?;
    let diff = minkowski(&kc, MinkowskiOp::Diff, &kc, DEFAULT_COVER_CAP)?;
    let mut points: Vec<T> = Vec::new();
    let mut steps = Vec::new();
    let mut j = 0usize;
    loop {
        let x = grid.clone() * T::from_int(j as i64);
        if x > T::one() {
            break;
        }
        let clear = !exclusion.contains(&x)
            && points.iter().all(|y| {
                !diff.contains(&(x.clone() - y.clone())) && !diff.contains(&(y.clone() - x.clone()))
            });
        if clear {
            points.push(x);
            steps.push(j);
            if points.len() == m {
                return Ok(SampleSet { points, steps, depth, k: k.clone(), exclusion: exclusion.clone() });
            }
        }
        j += 1;
    }
    Err(AvoidError::GridExhausted { found: points.len(), wanted: m })
}

/// Members `x` with `x + t` in the depth-`d` cover of `K`.
pub fn verify_single_hit<T: Scalar>(x: &SampleSet<T>, t: &T, depth: usize) -> Result<usize, AvoidError> {
    if depth > x.depth {
        return Err(AvoidError::Precondition(format!(
            "check depth {depth} exceeds the sample's avoidance depth {}",
            x.depth
        )));
    }
    let kc = attractor_cover(&x.k, depth, DEFAULT_COVER_CAP)?;
    Ok(x.points.iter().filter(|p| kc.contains(&((*p).clone() + t.clone()))).count())
}
