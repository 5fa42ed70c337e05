use super::family::FiniteFamily;
use super::search::{FatnessVerdict, SearchStats};
use crate::symbolic::{enumerate_slaloms, escapes};

/// Reference oracle: walk every slalom in canonical order, no pruning at all.
pub fn brute_force_is_fat(f: &FiniteFamily, k: usize, height: usize) -> FatnessVerdict {
    let mut examined = 0u64;
    for s in enumerate_slaloms(f.base(), k, height) {
        examined += 1;
        if !f.iter().any(|t| escapes(t, &s)) {
            return FatnessVerdict {
                is_fat: false,
                killer: Some(s),
                k,
                height,
                searched: SearchStats { examined, pruned: 0 },
            };
        }
    }
    FatnessVerdict { is_fat: true, killer: None, k, height, searched: SearchStats { examined, pruned: 0 } }
}
