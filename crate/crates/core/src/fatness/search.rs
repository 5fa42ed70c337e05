//! Exact k-fatness by column-wise branch and bound over the adversary's choices.
//!
//! For `k ≥ 1` a killer of height `h' < h` can always be padded with one more
//! forbidden digit at column `h-1` and still kill, so "some killer with
//! `ht ≤ h`" is decided at exactly `h`, where only members of length `≥ h`
//! matter. At each column the adversary blocks `k` of the digits still present
//! among the survivors (blocking fewer never helps). Failed states are
//! memoized on `(column, survivor set)`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::family::FiniteFamily;
use crate::symbolic::{alphabet, DigitSet, DigitString, Slalom};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub examined: u64,
    pub pruned: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FatnessVerdict {
    pub is_fat: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub killer: Option<Slalom>,
    pub k: usize,
    pub height: usize,
    pub searched: SearchStats,
}

impl FatnessVerdict {
    /// Same answer and same killer; search statistics are ignored.
    pub fn agrees_with(&self, other: &FatnessVerdict) -> bool {
        self.is_fat == other.is_fat && self.killer == other.killer
    }
}

struct Search {
    b: usize,
    h: usize,
    k: usize,
    /// Digits on columns `b..h` of each distinct survivor prefix.
    rows: Vec<Vec<u8>>,
    failed: HashSet<(usize, Vec<u32>)>,
    stats: SearchStats,
}

impl Search {
    fn new(f: &FiniteFamily, k: usize, h: usize) -> Self {
        let b = f.base().len();
        let mut rows: Vec<Vec<u8>> = f
            .iter()
            .filter(|t| t.len() >= h)
            .map(|t| t.digits()[b..h].to_vec())
            .collect();
        rows.dedup();
        Search { b, h, k, rows, failed: HashSet::new(), stats: SearchStats::default() }
    }

    fn all(&self) -> Vec<u32> {
        (0..self.rows.len() as u32).collect()
    }

    fn filter(&self, col: usize, surv: &[u32], blocked: DigitSet) -> Vec<u32> {
        let j = col - self.b;
        surv.iter().copied().filter(|&r| !blocked.contains(self.rows[r as usize][j])).collect()
    }

    /// Can columns `col..h` be chosen so that no survivor gets through?
    fn killable(&mut self, col: usize, surv: &[u32]) -> bool {
        self.stats.examined += 1;
        if surv.is_empty() {
            return true;
        }
        if col == self.h {
            return false;
        }
        let j = col - self.b;
        let mut freq: HashMap<u8, u32> = HashMap::new();
        for &r in surv {
            *freq.entry(self.rows[r as usize][j]).or_default() += 1;
        }
        if freq.len() <= self.k {
            self.stats.pruned += 1;
            return true;
        }
        let key = (col, surv.to_vec());
        if self.failed.contains(&key) {
            self.stats.pruned += 1;
            return false;
        }
        // Most frequent digits first: good kills tend to come early.
        let mut present: Vec<(u8, u32)> = freq.into_iter().collect();
        present.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let digits: Vec<u8> = present.into_iter().map(|(d, _)| d).collect();
        let mut found = false;
        for_each_combination(digits.len(), self.k, |idx| {
            let blocked = idx.iter().fold(DigitSet::EMPTY, |s, &i| s.with(digits[i]));
            let next = self.filter(col, surv, blocked);
            found = self.killable(col + 1, &next);
            found
        });
        if !found {
            self.failed.insert(key);
        }
        found
    }

    /// The least killer of exact height `h` in canonical order, if any.
    fn first_killer(&mut self, base: &DigitString) -> Option<Slalom> {
        let mut surv = self.all();
        if !self.killable(self.b, &surv) {
            return None;
        }
        let mut cols = Vec::with_capacity(self.h - self.b);
        for col in self.b..self.h {
            let last = col + 1 == self.h;
            let mut choice = if last { DigitSet::singleton(0) } else { DigitSet::EMPTY };
            loop {
                let next = self.filter(col, &surv, choice);
                if self.killable(col + 1, &next) {
                    surv = next;
                    break;
                }
                choice = choice
                    .next_subset(alphabet(col), self.k)
                    .expect("a completion exists at this column");
            }
            cols.push(choice);
        }
        Some(Slalom::from_columns(base.clone(), cols))
    }
}

/// Calls `visit` on each `r`-subset of `0..n` in lexicographic order until it
/// returns `true`.
fn for_each_combination(n: usize, r: usize, mut visit: impl FnMut(&[usize]) -> bool) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if visit(&idx) {
            return;
        }
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Is every canonical `k`-slalom above `F.base` with `ht ≤ height` escaped by
/// a member of `F`? On failure the least killer in canonical order is returned.
pub fn is_fat(f: &FiniteFamily, k: usize, height: usize) -> FatnessVerdict {
    let base = f.base();
    let b = base.len();
    let mut stats = SearchStats::default();
    let verdict = |killer: Option<Slalom>, stats| FatnessVerdict {
        is_fat: killer.is_none(),
        killer,
        k,
        height,
        searched: stats,
    };
    if height < b {
        // No slalom above the base is that low.
        return verdict(None, stats);
    }
    stats.examined += 1;
    if f.is_empty() {
        return verdict(Some(Slalom::empty(base.clone())), stats);
    }
    if k == 0 {
        return verdict(None, stats);
    }
    for h in b + 1..=height {
        let mut search = Search::new(f, k, h);
        let killer = search.first_killer(base);
        stats.examined += search.stats.examined;
        stats.pruned += search.stats.pruned;
        if killer.is_some() {
            return verdict(killer, stats);
        }
    }
    verdict(None, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(d: &[u8]) -> DigitString {
        DigitString::from_slice(d)
    }

    #[test]
    fn combinations_in_lex_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            false
        });
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn full_length_two_is_two_fat() {
        let f = FiniteFamily::full(&ds(&[]), 2, 2);
        let v = is_fat(&f, 2, 2);
        assert!(v.is_fat);
        assert!(v.killer.is_none());
    }

    #[test]
    fn full_column_block_kills() {
        let f = FiniteFamily::full(&ds(&[]), 2, 2);
        let v = is_fat(&f, 3, 1);
        assert!(!v.is_fat);
        assert_eq!(v.killer.unwrap().to_string(), "[];0:{0,1,2};ht=1");
    }

    #[test]
    fn singleton_killed_by_its_digit() {
        let f = FiniteFamily::new(ds(&[]), [ds(&[0, 0])]).unwrap();
        let v = is_fat(&f, 1, 1);
        assert_eq!(v.killer.unwrap().to_string(), "[];0:{0};ht=1");
    }

    #[test]
    fn empty_family_is_never_fat() {
        let f = FiniteFamily::empty(ds(&[1]));
        for k in 0..3 {
            let v = is_fat(&f, k, 1);
            assert_eq!(v.killer, Some(Slalom::empty(ds(&[1]))));
        }
    }

    #[test]
    fn short_members_lose_to_taller_slaloms() {
        // Length-1 strings cannot reach height 2.
        let f = FiniteFamily::full(&ds(&[]), 1, 1);
        assert!(is_fat(&f, 2, 1).is_fat);
        let v = is_fat(&f, 1, 2);
        assert_eq!(v.killer.unwrap().to_string(), "[];1:{0};ht=2");
    }
}
