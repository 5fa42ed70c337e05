use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::PosetError;
use crate::symbolic::{alphabet, DigitString};

/// How `f(σ)` is formed when `σ` has no table entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "digits")]
pub enum DefaultRule {
    /// `f(σ) = σ`; the open set is the whole space.
    Identity,
    /// `f(σ) = σ⌢d_0⌢d_1…`, each digit reduced modulo its column's alphabet.
    Append(Vec<u8>),
}

/// A rule `f` with `f(σ) ⊇ σ`, given as an exception table over a default.
/// It names the dense open set `U_f = ⋃_σ [f(σ)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseOpenSpec {
    pub default: DefaultRule,
    #[serde(default)]
    pub table: BTreeMap<DigitString, DigitString>,
}

impl Default for DenseOpenSpec {
    /// `f(σ) = σ⌢0`.
    fn default() -> Self {
        DenseOpenSpec { default: DefaultRule::Append(vec![0]), table: BTreeMap::new() }
    }
}

impl DenseOpenSpec {
    pub fn whole_space() -> Self {
        DenseOpenSpec { default: DefaultRule::Identity, table: BTreeMap::new() }
    }

    pub fn append(digits: Vec<u8>) -> Self {
        DenseOpenSpec { default: DefaultRule::Append(digits), table: BTreeMap::new() }
    }

    pub fn with_entry(mut self, sigma: DigitString, image: DigitString) -> Result<Self, PosetError> {
        if !image.extends(&sigma) {
            return Err(PosetError::BadDenseOpen(format!("f({sigma}) = {image} does not extend it")));
        }
        self.table.insert(sigma, image);
        Ok(self)
    }

    /// Table entries must extend their argument; the default rule always does.
    pub fn check(&self) -> Result<(), PosetError> {
        match self.table.iter().find(|(s, img)| !img.extends(s)) {
            Some((s, img)) => Err(PosetError::BadDenseOpen(format!("f({s}) = {img} does not extend it"))),
            None => Ok(()),
        }
    }

    pub fn apply(&self, sigma: &DigitString) -> DigitString {
        if let Some(img) = self.table.get(sigma) {
            return img.clone();
        }
        match &self.default {
            DefaultRule::Identity => sigma.clone(),
            DefaultRule::Append(ds) => ds.iter().fold(sigma.clone(), |acc, &d| {
                let d = d % alphabet(acc.len()) as u8;
                acc.child(d).unwrap_or(acc)
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Membership {
    Contained,
    UndecidedAtDepth,
}

/// `CONTAINED` iff some prefix `σ ⊆ s` has `f(σ) ⊆ s`, i.e. `[s] ⊆ U_f`.
pub fn dense_open_member(f: &DenseOpenSpec, s: &DigitString) -> Membership {
    let hit = (0..=s.len()).any(|n| s.extends(&f.apply(&s.prefix(n))));
    if hit { Membership::Contained } else { Membership::UndecidedAtDepth }
}

/// First extension of `r` (by length, then lexicographically) whose cylinder
/// lies in `U_f`. Gives up after `cap` candidates and returns `f(r)`, which is
/// always inside.
pub fn extend_into(f: &DenseOpenSpec, r: &DigitString, cap: usize) -> DigitString {
    let mut queue = VecDeque::from([r.clone()]);
    let mut seen = 0usize;
    while let Some(u) = queue.pop_front() {
        if dense_open_member(f, &u) == Membership::Contained {
            return u;
        }
        seen += 1;
        if seen >= cap {
            break;
        }
        queue.extend(u.children());
    }
    f.apply(r)
}
