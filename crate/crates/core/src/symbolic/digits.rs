use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SymbolicError;
use crate::Rational;

/// Longest digit string accepted by the constructors.
pub const MAX_LEN: usize = 64;

/// Size of the alphabet at column `i`, i.e. `|Z_{i+3}|`.
#[inline]
pub const fn alphabet(i: usize) -> usize {
    i + 3
}

/// A finite element of Σ: `d(i) < i + 3` at every column.
///
/// Ordering is lexicographic with a proper prefix sorting first, which is the
/// member order used by escaper searches.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DigitString {
    digits: Vec<u8>,
}

impl DigitString {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(digits: Vec<u8>) -> Result<Self, SymbolicError> {
        if digits.len() > MAX_LEN {
            return Err(SymbolicError::TooLong { len: digits.len(), max: MAX_LEN });
        }
        for (i, &d) in digits.iter().enumerate() {
            if d as usize >= alphabet(i) {
                return Err(SymbolicError::DigitOutOfRange { index: i, digit: d as usize });
            }
        }
        Ok(Self { digits })
    }

    /// Panicking constructor for literals in tests and examples.
    pub fn from_slice(digits: &[u8]) -> Self {
        Self::new(digits.to_vec()).expect("invalid digit string literal")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    #[inline]
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<u8> {
        self.digits.get(i).copied()
    }

    pub fn last(&self) -> Option<u8> {
        self.digits.last().copied()
    }

    /// `self ⊇ s` in the prefix order.
    pub fn extends(&self, s: &DigitString) -> bool {
        self.digits.starts_with(&s.digits)
    }

    pub fn comparable(&self, other: &DigitString) -> bool {
        self.extends(other) || other.extends(self)
    }

    pub fn prefix(&self, n: usize) -> DigitString {
        DigitString { digits: self.digits[..n.min(self.len())].to_vec() }
    }

    /// Appends one digit; fails if it is outside the next column's alphabet.
    pub fn child(&self, d: u8) -> Result<DigitString, SymbolicError> {
        let i = self.len();
        if i >= MAX_LEN {
            return Err(SymbolicError::TooLong { len: i + 1, max: MAX_LEN });
        }
        if d as usize >= alphabet(i) {
            return Err(SymbolicError::DigitOutOfRange { index: i, digit: d as usize });
        }
        let mut digits = self.digits.clone();
        digits.push(d);
        Ok(DigitString { digits })
    }

    /// All one-digit extensions, in digit order.
    pub fn children(&self) -> impl Iterator<Item = DigitString> + '_ {
        (0..alphabet(self.len()) as u8).map(move |d| {
            let mut digits = self.digits.clone();
            digits.push(d);
            DigitString { digits }
        })
    }

    /// `Σ_{m<|s|} s(m)/(m+3)!`.
    pub fn to_real(&self) -> Rational {
        let mut fact = BigInt::from(2);
        let mut num = BigInt::zero();
        // Accumulate over the common denominator (|s|+2)!.
        for (m, &d) in self.digits.iter().enumerate() {
            fact *= BigInt::from(m + 3);
            num = num * BigInt::from(m + 3) + BigInt::from(d);
        }
        Rational::new(num, fact)
    }

    /// The image of the cylinder `[s]`: `[to_real(s), to_real(s) + 1/(|s|+2)!]`.
    ///
    /// The width is the tail sum `Σ_{m≥L} (m+2)/(m+3)!`, which telescopes.
    pub fn cylinder(&self) -> (Rational, Rational) {
        let lo = self.to_real();
        let mut fact = BigInt::one();
        for j in 2..=self.len() + 2 {
            fact *= BigInt::from(j);
        }
        let hi = &lo + Rational::new(BigInt::one(), fact);
        (lo, hi)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for DigitString {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| SymbolicError::Parse(format!("expected [..], got {s:?}")))?;
        if inner.trim().is_empty() {
            return Ok(DigitString::empty());
        }
        let digits = inner
            .split(',')
            .map(|p| p.trim().parse::<u8>().map_err(|e| SymbolicError::Parse(format!("{p:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        DigitString::new(digits)
    }
}

impl Serialize for DigitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DigitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A digit string read as a point of `∏ Z_{m+3}` by padding with zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteSupportPoint(pub DigitString);

impl FiniteSupportPoint {
    pub fn digit(&self, i: usize) -> u8 {
        self.0.get(i).unwrap_or(0)
    }

    pub fn prefix(&self, n: usize) -> DigitString {
        let mut d = self.0.digits().to_vec();
        d.resize(n, 0);
        d.truncate(n);
        DigitString { digits: d }
    }

    /// Zero padding adds nothing to the series, so this is exact.
    pub fn to_real(&self) -> Rational {
        self.0.to_real()
    }
}

pub fn extends(t: &DigitString, s: &DigitString) -> bool {
    t.extends(s)
}

pub fn parallel(s: &DigitString, t: &DigitString) -> bool {
    s.digits
        .iter()
        .zip(&t.digits)
        .enumerate()
        .all(|(i, (&a, &b))| a as usize + b as usize != i + 2)
}

/// `[s]` meets `C_EK`: no digit takes its column's top value.
pub fn cek_prefix(s: &DigitString) -> bool {
    s.digits.iter().enumerate().all(|(i, &d)| d as usize != i + 2)
}

/// For equal-length strings, `parallel` decided through the column-wise sum mod
/// `i+3`; the sum is returned as the witness.
pub fn parallel_iff_cek(
    s: &DigitString,
    t: &DigitString,
) -> Result<(bool, DigitString), SymbolicError> {
    if s.len() != t.len() {
        return Err(SymbolicError::LengthMismatch { left: s.len(), right: t.len() });
    }
    let digits = s
        .digits
        .iter()
        .zip(&t.digits)
        .enumerate()
        .map(|(i, (&a, &b))| ((a as usize + b as usize) % alphabet(i)) as u8)
        .collect();
    let w = DigitString { digits };
    Ok((cek_prefix(&w), w))
}
