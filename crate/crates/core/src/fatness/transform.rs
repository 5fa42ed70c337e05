use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::family::{Family, FiniteFamily};
use super::search::{is_fat, FatnessVerdict};
use super::FatnessError;
use crate::symbolic::{enumerate_slaloms, escapes, parallel, DigitString, Slalom};

/// `F ∖ V` together with its verdict at the same `(k, height)`.
///
/// When every string of `V` is shorter than `height` and `F` was fat, the
/// verdict is fat as well: any slalom can be padded past `V`'s lengths.
pub fn remove_finite(
    f: &FiniteFamily,
    v: &BTreeSet<DigitString>,
    k: usize,
    height: usize,
) -> (FiniteFamily, FatnessVerdict) {
    let rest = f.without(v);
    let verdict = is_fat(&rest, k, height);
    (rest, verdict)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractMode {
    /// Slaloms already escaped by an earlier pick are skipped.
    #[default]
    Skip,
    /// One pick per enumerated slalom, as in the textbook construction.
    EverySlalom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub picks: Vec<DigitString>,
    pub family: FiniteFamily,
    /// Slaloms processed, in order; `None` where a slalom was skipped.
    pub handled: Vec<(Slalom, Option<usize>)>,
    pub verdict: FatnessVerdict,
}

/// Pairwise incomparable `G ⊆ F`, `(k-1)`-fat to `target_height`.
///
/// Slaloms are taken in canonical order. Each one is augmented with the last
/// digit of every earlier pick (at that pick's last column), and the escaper
/// must be strictly longer than the previous pick, which rules out any pick
/// extending an earlier one.
pub fn extract_incomparable<F: Family>(
    f: &F,
    k: usize,
    target_height: usize,
    mode: ExtractMode,
) -> Result<Extraction, FatnessError> {
    if k == 0 {
        return Err(FatnessError::WidthTooSmall);
    }
    let base = f.base().clone();
    let mut picks: Vec<DigitString> = Vec::new();
    let mut handled = Vec::new();
    for s in enumerate_slaloms(&base, k - 1, target_height) {
        if mode == ExtractMode::Skip && picks.iter().any(|t| escapes(t, &s)) {
            handled.push((s, None));
            continue;
        }
        let augmented = augment_with_picks(&s, &picks);
        let min_len = picks.last().map_or(base.len() + 1, |t| t.len() + 1);
        let t = f
            .find_escaper(&augmented, min_len)
            .ok_or_else(|| FatnessError::InsufficientFatness { slalom: augmented.clone() })?;
        handled.push((s, Some(picks.len())));
        picks.push(t);
    }
    let family = FiniteFamily::new(base, picks.iter().cloned())?;
    let verdict = is_fat(&family, k - 1, target_height);
    if !verdict.is_fat {
        return Err(FatnessError::InsufficientFatness {
            slalom: verdict.killer.expect("killer on a failed verdict"),
        });
    }
    Ok(Extraction { picks, family, handled, verdict })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyExtraction {
    pub family: FiniteFamily,
    /// Every slalom with `ht ≤ certified_height` is escaped by the family.
    pub certified_height: usize,
}

/// [`extract_incomparable`] in skip mode, run up to `max_height` and stopped at
/// the first slalom with no admissible escaper instead of failing. Picks made
/// for slaloms of that slalom's height are dropped, so the result is exactly
/// what a run with target height `certified_height` produces.
///
/// Returns `None` only when not even the empty slalom gets a pick.
pub fn extract_to_max_height<F: Family>(f: &F, k: usize, max_height: usize) -> Option<GreedyExtraction> {
    assert!(k >= 1);
    let base = f.base().clone();
    let mut picks: Vec<DigitString> = Vec::new();
    let mut pick_heights: Vec<usize> = Vec::new();
    let mut certified = max_height;
    for s in enumerate_slaloms(&base, k - 1, max_height) {
        if picks.iter().any(|t| escapes(t, &s)) {
            continue;
        }
        let min_len = picks.last().map_or(base.len() + 1, |t| t.len() + 1);
        match f.find_escaper(&augment_with_picks(&s, &picks), min_len) {
            Some(t) => {
                picks.push(t);
                pick_heights.push(s.height());
            }
            None => {
                certified = s.height().checked_sub(1)?;
                let keep = pick_heights.iter().take_while(|&&h| h <= certified).count();
                picks.truncate(keep);
                break;
            }
        }
    }
    if picks.is_empty() {
        return None;
    }
    let family = FiniteFamily::new(base, picks).expect("picks extend the base");
    Some(GreedyExtraction { family, certified_height: certified })
}

fn augment_with_picks(s: &Slalom, picks: &[DigitString]) -> Slalom {
    picks.iter().fold(s.clone(), |acc, t| {
        let i = t.len() - 1;
        acc.with_digit(i, t.digits()[i])
    })
}

/// Members of `F` parallel to `sigma`, with the `(k-1, height)` verdict.
pub fn prune_parallel(
    f: &FiniteFamily,
    sigma: &DigitString,
    k: usize,
    height: usize,
) -> Result<(FiniteFamily, FatnessVerdict), FatnessError> {
    if k == 0 {
        return Err(FatnessError::WidthTooSmall);
    }
    if !parallel(f.base(), sigma) {
        return Err(FatnessError::BaseNotParallel { base: f.base().clone(), sigma: sigma.clone() });
    }
    let pruned = f.filter(|t| parallel(t, sigma));
    let verdict = is_fat(&pruned, k - 1, height);
    Ok((pruned, verdict))
}

/// Adds the digit `i+2-sigma(i)` at every column `|base| ≤ i < |sigma|`.
///
/// A `(k-1)`-killer of the pruned family turns into a `k`-killer of the whole
/// family: an escaper of the result is forced to be parallel to `sigma`.
pub fn augment_killer(killer: &Slalom, sigma: &DigitString) -> Slalom {
    (killer.base().len()..sigma.len()).fold(killer.clone(), |acc, i| {
        acc.with_digit(i, (i + 2 - sigma.digits()[i] as usize) as u8)
    })
}
