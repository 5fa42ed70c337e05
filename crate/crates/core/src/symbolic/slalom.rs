use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::digits::{alphabet, DigitString, MAX_LEN};
use super::SymbolicError;

/// A set of digits of one column, as a bitmask. Columns never exceed 66 digits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DigitSet(u128);

impl DigitSet {
    pub const EMPTY: DigitSet = DigitSet(0);

    pub fn from_bits(bits: u128) -> Self {
        DigitSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn singleton(d: u8) -> Self {
        DigitSet(1u128 << d)
    }

    /// Every digit of `Z_n`.
    pub fn full(n: usize) -> Self {
        if n >= 128 { DigitSet(u128::MAX) } else { DigitSet((1u128 << n) - 1) }
    }

    #[inline]
    pub fn contains(self, d: u8) -> bool {
        (d as u32) < 128 && self.0 >> d & 1 == 1
    }

    pub fn insert(&mut self, d: u8) {
        self.0 |= 1u128 << d;
    }

    pub fn with(mut self, d: u8) -> Self {
        self.insert(d);
        self
    }

    pub fn union(self, other: DigitSet) -> Self {
        DigitSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: DigitSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = u8> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let d = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            Some(d)
        })
    }

    fn max(self) -> Option<u8> {
        (self.0 != 0).then(|| 127 - self.0.leading_zeros() as u8)
    }

    /// Successor in the lexicographic order of sorted digit vectors (prefix
    /// first) among subsets of `Z_n` of size at most `k`.
    pub fn next_subset(self, n: usize, k: usize) -> Option<DigitSet> {
        let n = n.min(128);
        let k = k.min(n);
        let mut s = self;
        match s.max() {
            None => (k > 0 && n > 0).then(|| DigitSet::singleton(0)),
            Some(top) => {
                if s.len() < k && (top as usize) + 1 < n {
                    return Some(s.with(top + 1));
                }
                // Bump the last element, popping it when it cannot move.
                let mut top = top;
                loop {
                    s.0 &= !(1u128 << top);
                    if (top as usize) + 1 < n {
                        return Some(s.with(top + 1));
                    }
                    top = s.max()?;
                }
            }
        }
    }
}

impl Ord for DigitSet {
    /// Lexicographic on the sorted digit vectors, shorter prefix first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for DigitSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (j, d) in self.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite slalom above `base`: forbidden digit sets on columns `≥ |base|`.
///
/// Stored canonically: digits outside a column's alphabet are dropped and
/// trailing empty columns trimmed, so `height` is exact. The width is the
/// largest column, i.e. the least `k` for which this is a `k`-slalom.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Slalom {
    base: DigitString,
    /// `columns[j]` is column `|base| + j`; the last entry is nonempty.
    columns: Vec<DigitSet>,
}

impl Slalom {
    pub fn empty(base: DigitString) -> Self {
        Slalom { base, columns: Vec::new() }
    }

    /// Builds from `(column, digits)` pairs; repeated columns are merged.
    pub fn new<I, D>(base: DigitString, cols: I) -> Result<Self, SymbolicError>
    where
        I: IntoIterator<Item = (usize, D)>,
        D: IntoIterator<Item = usize>,
    {
        let mut columns: Vec<DigitSet> = Vec::new();
        for (i, digits) in cols {
            if i < base.len() {
                return Err(SymbolicError::ColumnBelowBase { column: i, base_len: base.len() });
            }
            if i >= MAX_LEN {
                return Err(SymbolicError::TooLong { len: i + 1, max: MAX_LEN });
            }
            let j = i - base.len();
            if columns.len() <= j {
                columns.resize(j + 1, DigitSet::EMPTY);
            }
            for d in digits {
                if d < alphabet(i) {
                    columns[j].insert(d as u8);
                }
            }
        }
        Ok(Self::from_columns(base, columns))
    }

    /// Columns given relative to `|base|`; non-canonical content is stripped.
    pub fn from_columns(base: DigitString, mut columns: Vec<DigitSet>) -> Self {
        let b = base.len();
        for (j, c) in columns.iter_mut().enumerate() {
            *c = DigitSet(c.0 & DigitSet::full(alphabet(b + j)).0);
        }
        while columns.last().is_some_and(|c| c.is_empty()) {
            columns.pop();
        }
        Slalom { base, columns }
    }

    pub fn base(&self) -> &DigitString {
        &self.base
    }

    /// `ht(S)`: least column from which every column is empty (at least `|base|`).
    pub fn height(&self) -> usize {
        self.base.len() + self.columns.len()
    }

    pub fn width(&self) -> usize {
        self.columns.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Forbidden digits at absolute column `i`.
    pub fn column(&self, i: usize) -> DigitSet {
        i.checked_sub(self.base.len())
            .and_then(|j| self.columns.get(j).copied())
            .unwrap_or(DigitSet::EMPTY)
    }

    /// The stored columns, starting at column `|base|`.
    pub fn columns(&self) -> &[DigitSet] {
        &self.columns
    }

    /// Nonempty columns with their absolute index.
    pub fn nonempty_columns(&self) -> impl Iterator<Item = (usize, DigitSet)> + '_ {
        let b = self.base.len();
        self.columns.iter().enumerate().filter(|(_, c)| !c.is_empty()).map(move |(j, &c)| (b + j, c))
    }

    /// Adds digit `d` to column `i` (ignored when `d` is outside the alphabet).
    pub fn with_digit(&self, i: usize, d: u8) -> Slalom {
        assert!(i >= self.base.len(), "column below base");
        let mut columns = self.columns.clone();
        let j = i - self.base.len();
        if columns.len() <= j {
            columns.resize(j + 1, DigitSet::EMPTY);
        }
        columns[j].insert(d);
        Slalom::from_columns(self.base.clone(), columns)
    }

    pub fn is_subslalom_of(&self, other: &Slalom) -> bool {
        self.base == other.base
            && self.height() <= other.height()
            && self.nonempty_columns().all(|(i, c)| c.is_subset(other.column(i)))
    }

    /// Order of [`enumerate_slaloms`](super::enumerate_slaloms): height, then
    /// the column tuple lexicographically.
    pub fn canonical_cmp(&self, other: &Slalom) -> Ordering {
        self.height()
            .cmp(&other.height())
            .then_with(|| self.columns.cmp(&other.columns))
    }
}

impl Ord for Slalom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base.cmp(&other.base).then_with(|| self.canonical_cmp(other))
    }
}

impl PartialOrd for Slalom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `t` escapes `S`: it lies above the base, reaches `ht(S)`, and avoids every
/// forbidden digit on the way.
pub fn escapes(t: &DigitString, s: &Slalom) -> bool {
    if !t.extends(&s.base) || t.len() < s.height() {
        return false;
    }
    let b = s.base.len();
    s.columns.iter().enumerate().all(|(j, c)| !c.contains(t.digits()[b + j]))
}

impl fmt::Display for Slalom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        for (i, c) in self.nonempty_columns() {
            write!(f, ";{i}:{c}")?;
        }
        write!(f, ";ht={}", self.height())
    }
}

impl fmt::Debug for Slalom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Slalom {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| SymbolicError::Parse(format!("slalom {s:?}: {m}"));
        let mut parts = s.trim().split(';');
        let base: DigitString = parts.next().ok_or_else(|| bad("missing base"))?.parse()?;
        let mut cols = Vec::new();
        let mut ht = None;
        for part in parts {
            let part = part.trim();
            if let Some(h) = part.strip_prefix("ht=") {
                ht = Some(h.parse::<usize>().map_err(|_| bad("bad ht"))?);
                continue;
            }
            let (i, set) = part.split_once(':').ok_or_else(|| bad("expected i:{..}"))?;
            let i: usize = i.trim().parse().map_err(|_| bad("bad column index"))?;
            let set = set
                .trim()
                .strip_prefix('{')
                .and_then(|r| r.strip_suffix('}'))
                .ok_or_else(|| bad("expected {..}"))?;
            let digits = set
                .split(',')
                .filter(|d| !d.trim().is_empty())
                .map(|d| d.trim().parse::<usize>().map_err(|_| bad("bad digit")))
                .collect::<Result<Vec<_>, _>>()?;
            cols.push((i, digits));
        }
        let slalom = Slalom::new(base, cols)?;
        match ht {
            Some(h) if h != slalom.height() => Err(bad("ht does not match columns")),
            _ => Ok(slalom),
        }
    }
}

impl Serialize for Slalom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slalom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}
