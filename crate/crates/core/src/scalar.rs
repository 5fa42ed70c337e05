//! Scalar abstraction shared by the interval, IFS and avoidance code.
//!
//! Everything geometric is written against [`Scalar`], so the same routines run
//! on exact rationals (the default, see [`crate::Rational`]) or on `f64`/`f32`
//! when an approximate answer is good enough.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + ToPrimitive + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (rationals), `false` for floats.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Largest integer not exceeding `self`.
    fn floor_i128(&self) -> i128;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses `"p/q"`, `"p"` or a decimal literal.
    fn parse_text(s: &str) -> Option<Self>;

    fn to_text(&self) -> String {
        self.to_string()
    }

    fn half(&self) -> Self {
        self.clone() / Self::from_int(2)
    }
}

pub fn min_of<T: Scalar>(a: &T, b: &T) -> T {
    if b < a { b.clone() } else { a.clone() }
}

pub fn max_of<T: Scalar>(a: &T, b: &T) -> T {
    if b > a { b.clone() } else { a.clone() }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn floor_i128(&self) -> i128 {
        self.floor() as i128
    }

    fn parse_text(s: &str) -> Option<Self> {
        parse_fraction_float(s)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn floor_i128(&self) -> i128 {
        self.floor() as i128
    }

    fn parse_text(s: &str) -> Option<Self> {
        parse_fraction_float(s).map(|v| v as f32)
    }
}

fn parse_fraction_float(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: f64 = d.trim().parse().ok()?;
            (d != 0.0).then(|| n.trim().parse::<f64>().ok().map(|n| n / d))?
        }
        None => s.parse().ok(),
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn floor_i128(&self) -> i128 {
        self.floor().to_integer().to_i128().expect("floor out of i128 range")
    }

    fn parse_text(s: &str) -> Option<Self> {
        parse_exact(s, |n| BigInt::from_str(n).ok())
    }
}

macro_rules! machine_ratio {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            const EXACT: bool = true;

            fn from_ratio(num: i64, den: i64) -> Self {
                Ratio::new(num as $int, den as $int)
            }

            fn floor_i128(&self) -> i128 {
                self.floor().to_integer() as i128
            }

            fn parse_text(s: &str) -> Option<Self> {
                parse_exact(s, |n| <$int>::from_str(n).ok())
            }
        }
    };
}

machine_ratio!(i64);
machine_ratio!(i128);

/// Exact parse of `p/q`, integers, and finite decimals such as `0.30103`.
fn parse_exact<I>(s: &str, int: impl Fn(&str) -> Option<I>) -> Option<Ratio<I>>
where
    I: Clone + Integer + FromPrimitive,
{
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = int(n.trim())?;
        let d = int(d.trim())?;
        return (!d.is_zero()).then(|| Ratio::new(n, d));
    }
    match s.split_once('.') {
        None => int(s).map(Ratio::from_integer),
        Some((whole, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let negative = whole.starts_with('-');
            let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
            let mut num = int(if digits.is_empty() { "0" } else { &digits })?;
            if negative {
                num = I::zero() - num;
            }
            let mut den = I::one();
            let ten = I::from_u8(10)?;
            for _ in 0..frac.len() {
                den = den * ten.clone();
            }
            Some(Ratio::new(num, den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        let q = BigRational::parse_text("7/24").unwrap();
        assert_eq!(q, BigRational::from_ratio(7, 24));
        let d = BigRational::parse_text("0.30103").unwrap();
        assert_eq!(d, BigRational::from_ratio(30103, 100000));
        let neg = BigRational::parse_text("-1.5").unwrap();
        assert_eq!(neg, BigRational::from_ratio(-3, 2));
        assert!(BigRational::parse_text("1/0").is_none());
        assert_eq!(<Ratio<i64>>::parse_text("3").unwrap(), Ratio::from_integer(3));
    }

    #[test]
    fn floor_matches_for_negative_values() {
        assert_eq!(BigRational::from_ratio(-1, 3).floor_i128(), -1);
        assert_eq!((-0.25f64).floor_i128(), -1);
        assert_eq!(<Ratio<i128>>::from_ratio(7, 2).floor_i128(), 3);
    }

    #[test]
    fn float_parse_accepts_fractions() {
        assert_eq!(f64::parse_text("1/4"), Some(0.25));
        assert_eq!(f64::parse_text("0.5"), Some(0.5));
    }
}
