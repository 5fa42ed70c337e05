use super::digits::{alphabet, DigitString};
use super::slalom::{DigitSet, Slalom};

/// All canonical slaloms of width `≤ k` above `base` with `ht ≤ max_height`.
///
/// Order: by height, then lexicographically on the tuple of columns
/// `|base|..ht`, each column compared as its sorted digit vector (empty first).
pub fn enumerate_slaloms(base: &DigitString, k: usize, max_height: usize) -> SlalomIter {
    SlalomIter {
        base: base.clone(),
        k,
        max_height,
        cols: Vec::new(),
        started: false,
        done: max_height < base.len(),
    }
}

/// Lazy odometer behind [`enumerate_slaloms`].
#[derive(Clone, Debug)]
pub struct SlalomIter {
    base: DigitString,
    k: usize,
    max_height: usize,
    cols: Vec<DigitSet>,
    started: bool,
    done: bool,
}

impl SlalomIter {
    fn advance(&mut self) -> bool {
        let b = self.base.len();
        let h = self.cols.len();
        // Rightmost column moves fastest; it must stay nonempty.
        for j in (0..h).rev() {
            if let Some(next) = self.cols[j].next_subset(alphabet(b + j), self.k) {
                self.cols[j] = next;
                for (jj, c) in self.cols.iter_mut().enumerate().skip(j + 1) {
                    *c = if jj + 1 == h { DigitSet::singleton(0) } else { DigitSet::EMPTY };
                }
                return true;
            }
        }
        if self.k == 0 || b + h + 1 > self.max_height {
            return false;
        }
        self.cols = vec![DigitSet::EMPTY; h + 1];
        self.cols[h] = DigitSet::singleton(0);
        true
    }
}

impl Iterator for SlalomIter {
    type Item = Slalom;

    fn next(&mut self) -> Option<Slalom> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(Slalom::from_columns(self.base.clone(), self.cols.clone()))
    }
}

fn binomial(n: u128, r: u128) -> u128 {
    (0..r).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of choices for one column: subsets of `Z_{i+3}` of size `≤ k`.
pub fn column_choices(i: usize, k: usize) -> u128 {
    let n = alphabet(i) as u128;
    (0..=k.min(alphabet(i)) as u128).map(|r| binomial(n, r)).fold(0u128, u128::saturating_add)
}

/// Length of [`enumerate_slaloms`] without walking it (saturating).
pub fn count_slaloms(base_len: usize, k: usize, max_height: usize) -> u128 {
    if max_height < base_len {
        return 0;
    }
    let mut total = 1u128;
    if k == 0 {
        return total;
    }
    let mut prefix = 1u128;
    for h in base_len + 1..=max_height {
        let last = h - 1;
        total = total.saturating_add(prefix.saturating_mul(column_choices(last, k) - 1));
        prefix = prefix.saturating_mul(column_choices(last, k));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn ds(d: &[u8]) -> DigitString {
        DigitString::from_slice(d)
    }

    #[test]
    fn width_one_height_one_above_empty() {
        let all: Vec<String> = enumerate_slaloms(&ds(&[]), 1, 1).map(|s| s.to_string()).collect();
        assert_eq!(all, ["[];ht=0", "[];0:{0};ht=1", "[];0:{1};ht=1", "[];0:{2};ht=1"]);
    }

    #[test]
    fn width_zero_gives_only_empty() {
        let all: Vec<Slalom> = enumerate_slaloms(&ds(&[]), 0, 5).collect();
        assert_eq!(all, vec![Slalom::empty(ds(&[]))]);
    }

    #[test]
    fn height_at_base_gives_only_empty() {
        let all: Vec<Slalom> = enumerate_slaloms(&ds(&[0]), 1, 1).collect();
        assert_eq!(all, vec![Slalom::empty(ds(&[0]))]);
        assert_eq!(enumerate_slaloms(&ds(&[0, 0]), 1, 1).count(), 0);
    }

    #[test]
    fn enumeration_is_sorted_distinct_and_counted() {
        for (base, k, h) in [(ds(&[]), 2, 2), (ds(&[1]), 3, 3), (ds(&[]), 1, 3), (ds(&[0, 2]), 2, 4)] {
            let all: Vec<Slalom> = enumerate_slaloms(&base, k, h).collect();
            assert_eq!(all.len() as u128, count_slaloms(base.len(), k, h));
            for w in all.windows(2) {
                assert_eq!(w[0].canonical_cmp(&w[1]), std::cmp::Ordering::Less);
            }
            let set: BTreeSet<_> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len());
            assert!(all.iter().all(|s| s.width() <= k && s.height() <= h));
        }
    }

    #[test]
    fn exhaustive_against_direct_product() {
        // Every (S(0), S(1)) pair with |S(i)| ≤ 2 appears exactly once.
        let expected = column_choices(0, 2) * column_choices(1, 2);
        assert_eq!(enumerate_slaloms(&ds(&[]), 2, 2).count() as u128, expected);
    }
}
