use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::cover::IntervalCover;
use super::ifs::{attractor_cover, SimilarIfs, DEFAULT_COVER_CAP};
use super::FractalError;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DimensionMethod {
    Similarity,
    BoxFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub method: DimensionMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual: Option<f64>,
}

/// The `s` with `Σ r_i^s = 1`.
pub fn similarity_dimension<T: Scalar>(ifs: &SimilarIfs<T>) -> Result<DimensionEstimate, FractalError> {
    if !ifs.non_overlapping() {
        return Err(FractalError::OverlappingIfs);
    }
    let ratios = ifs.ratios_f64();
    let value = if ratios.len() == 1 {
        0.0
    } else if ratios.iter().all(|&r| r == ratios[0]) {
        (ratios.len() as f64).ln() / (1.0 / ratios[0]).ln()
    } else {
        // Σ r^s is strictly decreasing in s; bracket and bisect.
        let g = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 { lo = mid } else { hi = mid }
        }
        0.5 * (lo + hi)
    };
    Ok(DimensionEstimate { value, method: DimensionMethod::Similarity, residual: None })
}

/// Grid boxes `[j/b^d, (j+1)/b^d)` meeting the cover, counted exactly.
pub fn box_count<T: Scalar>(cover: &IntervalCover<T>, b: i64, d: u32) -> u128 {
    let scale = T::from_int(b.pow(d));
    let mut count = 0u128;
    let mut last: Option<i128> = None;
    for iv in cover.intervals() {
        let lo = (iv.lo.clone() * scale.clone()).floor_i128();
        let hi_scaled = iv.hi.clone() * scale.clone();
        let mut hi = hi_scaled.floor_i128();
        if iv.hi > iv.lo && T::from_int(hi as i64) == hi_scaled {
            // Half-open boxes: a right endpoint on the grid opens no new box.
            hi -= 1;
        }
        let lo = last.map_or(lo, |l| lo.max(l + 1));
        if hi >= lo {
            count += (hi - lo + 1) as u128;
            last = Some(hi);
        }
    }
    count
}

/// Least-squares slope of `log N(b^{-d})` against `log b^d`.
///
/// `base` defaults to `round(1/min ratio)`, which makes the depth-`d` cover
/// pieces about one grid box wide.
pub fn box_dimension_fit<T: Scalar>(
    ifs: &SimilarIfs<T>,
    depths: RangeInclusive<usize>,
    base: Option<i64>,
) -> Result<DimensionEstimate, FractalError> {
    if depths.is_empty() {
        return Err(FractalError::EmptyRange);
    }
    let b = base.unwrap_or_else(|| (1.0 / ifs.min_ratio().to_f64_lossy()).round().max(2.0) as i64);
    let mut pts = Vec::new();
    for d in depths {
        let cover = attractor_cover(ifs, d, DEFAULT_COVER_CAP)?;
        let n = box_count(&cover, b, d as u32);
        pts.push((d as f64 * (b as f64).ln(), (n as f64).ln()));
    }
    let (value, residual) = least_squares(&pts);
    Ok(DimensionEstimate { value: value.max(0.0), method: DimensionMethod::BoxFit, residual: Some(residual) })
}

/// Slope and RMS residual; a single point gives slope 0.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChooseN {
    pub n: u64,
    /// `N·dim + 1`, as text in the scalar's own format.
    pub certificate: String,
    pub certified: bool,
}

/// Least integer `N > 1/(1 - dim)`, checked against `N·dim + 1 < N`.
pub fn choose_n<T: Scalar>(dim_upper: &T) -> Result<ChooseN, FractalError> {
    if dim_upper >= &T::one() || dim_upper < &T::zero() {
        return Err(FractalError::DimTooLarge(dim_upper.to_text()));
    }
    let bound = T::one() / (T::one() - dim_upper.clone());
    let mut n = (bound.floor_i128() + 1).max(1) as u64;
    // Guards float rounding in either direction.
    let holds = |n: u64| T::from_int(n as i64) * dim_upper.clone() + T::one() < T::from_int(n as i64);
    while !holds(n) {
        n += 1;
    }
    while n > 1 && holds(n - 1) {
        n -= 1;
    }
    let cert = T::from_int(n as i64) * dim_upper.clone() + T::one();
    Ok(ChooseN { n, certificate: cert.to_text(), certified: holds(n) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn similarity_closed_forms() {
        let thirds = SimilarIfs::<Rational>::middle(Rational::from_ratio(1, 3)).unwrap();
        assert!((similarity_dimension(&thirds).unwrap().value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        let d = SimilarIfs::<Rational>::digits(10, &[0, 5]);
        assert!((similarity_dimension(&d).unwrap().value - 2f64.ln() / 10f64.ln()).abs() < 1e-12);
        let one = SimilarIfs::<Rational>::new(vec![(Rational::from_ratio(1, 2), Rational::from_int(0))]).unwrap();
        assert_eq!(similarity_dimension(&one).unwrap().value, 0.0);
    }

    #[test]
    fn bisection_for_unequal_ratios() {
        // 1/2 and 1/4: s solves (1/2)^s + (1/4)^s = 1, i.e. log2 of the golden ratio.
        let ifs = SimilarIfs::<f64>::new(vec![(0.5, 0.0), (0.25, 0.75)]).unwrap();
        let s = similarity_dimension(&ifs).unwrap().value;
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s - phi.log2()).abs() < 1e-10);
    }

    #[test]
    fn overlapping_is_rejected() {
        let ov = SimilarIfs::<f64>::new(vec![(0.7, 0.0), (0.7, 0.3)]).unwrap();
        assert_eq!(similarity_dimension(&ov), Err(FractalError::OverlappingIfs));
    }

    #[test]
    fn box_fit_examples() {
        let d = SimilarIfs::<Rational>::digits(10, &[0, 5]);
        let est = box_dimension_fit(&d, 4..=12, None).unwrap();
        assert!((est.value - std::f64::consts::LOG10_2).abs() < 0.05, "{est:?}");
        let full = SimilarIfs::<Rational>::digits(2, &[0, 1]);
        let est = box_dimension_fit(&full, 4..=12, None).unwrap();
        assert!((est.value - 1.0).abs() < 0.02, "{est:?}");
        let one = SimilarIfs::<Rational>::new(vec![(Rational::from_ratio(1, 2), Rational::from_int(0))]).unwrap();
        assert!(box_dimension_fit(&one, 2..=8, None).unwrap().value.abs() < 1e-9);
    }

    #[test]
    fn choose_n_examples() {
        assert_eq!(choose_n(&0.0f64).unwrap().n, 2);
        assert_eq!(choose_n(&std::f64::consts::LOG10_2).unwrap().n, 2);
        assert_eq!(choose_n(&0.9f64).unwrap().n, 11);
        assert_eq!(choose_n(&Rational::from_ratio(9, 10)).unwrap().n, 11);
        assert_eq!(choose_n(&0.8614f64).unwrap().n, 8);
        assert!(choose_n(&1.0f64).is_err());
        assert!(choose_n(&Rational::from_ratio(9, 10)).unwrap().certified);
    }
}
