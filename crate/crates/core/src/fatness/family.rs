use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::FatnessError;
use crate::symbolic::{alphabet, escapes, DigitString, Slalom};

/// Anything escapers can be drawn from.
pub trait Family {
    fn base(&self) -> &DigitString;

    fn contains(&self, t: &DigitString) -> bool;

    /// First member in [`DigitString`] order that escapes `s` and has length
    /// at least `min_len`.
    fn find_escaper(&self, s: &Slalom, min_len: usize) -> Option<DigitString>;
}

/// A finite set of strings above a common base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteFamily {
    base: DigitString,
    members: BTreeSet<DigitString>,
}

impl FiniteFamily {
    pub fn new(
        base: DigitString,
        members: impl IntoIterator<Item = DigitString>,
    ) -> Result<Self, FatnessError> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|t| !t.extends(&base)) {
            return Err(FatnessError::NotAboveBase { member: bad.clone(), base });
        }
        Ok(FiniteFamily { base, members })
    }

    pub fn empty(base: DigitString) -> Self {
        FiniteFamily { base, members: BTreeSet::new() }
    }

    /// Every extension of `base` with length in `min_len..=max_len`.
    pub fn full(base: &DigitString, min_len: usize, max_len: usize) -> Self {
        let mut members = BTreeSet::new();
        let mut layer = vec![base.clone()];
        for len in base.len()..=max_len {
            if len >= min_len {
                members.extend(layer.iter().cloned());
            }
            if len == max_len {
                break;
            }
            layer = layer.iter().flat_map(|t| t.children().collect::<Vec<_>>()).collect();
        }
        FiniteFamily { base: base.clone(), members }
    }

    pub fn base(&self) -> &DigitString {
        &self.base
    }

    pub fn members(&self) -> &BTreeSet<DigitString> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.members.iter().map(|t| t.len()).max().unwrap_or(self.base.len())
    }

    pub fn iter(&self) -> impl Iterator<Item = &DigitString> {
        self.members.iter()
    }

    pub fn without(&self, v: &BTreeSet<DigitString>) -> FiniteFamily {
        FiniteFamily {
            base: self.base.clone(),
            members: self.members.difference(v).cloned().collect(),
        }
    }

    pub fn filter(&self, keep: impl Fn(&DigitString) -> bool) -> FiniteFamily {
        FiniteFamily {
            base: self.base.clone(),
            members: self.members.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }

    /// No member is a proper prefix of another.
    pub fn is_antichain(&self) -> bool {
        // In prefix-first order a comparable pair is always adjacent to some
        // extension chain, so checking each member against its successors until
        // they stop extending it is enough.
        let v: Vec<&DigitString> = self.members.iter().collect();
        (0..v.len()).all(|i| v.get(i + 1).is_none_or(|n| !n.extends(v[i])))
    }
}

impl Family for FiniteFamily {
    fn base(&self) -> &DigitString {
        &self.base
    }

    fn contains(&self, t: &DigitString) -> bool {
        self.members.contains(t)
    }

    fn find_escaper(&self, s: &Slalom, min_len: usize) -> Option<DigitString> {
        self.members.iter().find(|t| t.len() >= min_len && escapes(t, s)).cloned()
    }
}

/// `Σ[base]` truncated at `max_len`: every extension of `base` up to that length.
///
/// Never materialized; escapers are built column by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderFamily {
    pub base: DigitString,
    pub max_len: usize,
}

impl Family for CylinderFamily {
    fn base(&self) -> &DigitString {
        &self.base
    }

    fn contains(&self, t: &DigitString) -> bool {
        t.extends(&self.base) && t.len() <= self.max_len
    }

    fn find_escaper(&self, s: &Slalom, min_len: usize) -> Option<DigitString> {
        if !self.base.comparable(s.base()) {
            return None;
        }
        let mut t = if self.base.len() >= s.base().len() { self.base.clone() } else { s.base().clone() };
        let need = min_len.max(s.height()).max(t.len());
        if need > self.max_len || !escapes_prefix(&t, s) {
            return None;
        }
        // The lexicographically least string of the least admissible length.
        for i in t.len()..need {
            let col = s.column(i);
            let d = (0..alphabet(i) as u8).find(|&d| !col.contains(d))?;
            t = t.child(d).ok()?;
        }
        Some(t)
    }
}

/// `t` avoids every column of `s` it reaches (no length requirement).
fn escapes_prefix(t: &DigitString, s: &Slalom) -> bool {
    t.comparable(s.base())
        && (s.base().len()..t.len()).all(|i| !s.column(i).contains(t.digits()[i]))
}
