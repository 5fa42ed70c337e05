use std::collections::{BTreeMap, BTreeSet};

use super::condition::{NodeCert, TreeCondition};
use super::PosetError;
use crate::fatness::{extract_to_max_height, CylinderFamily};
use crate::symbolic::{DigitString, MAX_LEN};

/// Level-by-level condition with every string of length at most `depth`
/// available.
///
/// A node `t` shorter than `depth` gets as successors an antichain extracted
/// from `Σ[t]` (which is `(|t|+2)`-fat), certified `(|t|+1)`-fat up to the
/// largest height whose slaloms could all be handled before running out of
/// length. Nodes of length `depth` are leaves.
pub fn build_condition(depth: usize) -> Result<TreeCondition, PosetError> {
    if depth == 0 || depth > MAX_LEN {
        return Err(PosetError::DepthExhausted { detail: format!("depth {depth} outside 1..={MAX_LEN}") });
    }
    let root = DigitString::empty();
    let mut nodes = BTreeSet::from([root.clone()]);
    let mut annotations = BTreeMap::new();
    let mut level = vec![root.clone()];
    while !level.is_empty() {
        let mut next = Vec::new();
        for t in &level {
            if t.len() >= depth {
                continue;
            }
            let fam = CylinderFamily { base: t.clone(), max_len: depth };
            let out = extract_to_max_height(&fam, t.len() + 2, depth).ok_or_else(|| {
                PosetError::DepthExhausted { detail: format!("no successor for {t} at depth {depth}") }
            })?;
            annotations.insert(t.clone(), NodeCert { k: t.len() + 1, height: out.certified_height });
            next.extend(out.family.members().iter().cloned());
        }
        nodes.extend(next.iter().cloned());
        level = next;
    }
    TreeCondition::new(root, nodes, annotations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatness::is_fat;
    use crate::poset::{length_schedule, validate_condition};

    #[test]
    fn depth_three_validates() {
        let p = build_condition(3).unwrap();
        for t in p.inner_nodes() {
            let c = p.cert(t).unwrap();
            assert_eq!(c.k, t.len() + 1);
            assert!(c.height >= t.len());
            assert!(is_fat(&p.succ_family(t), c.k, c.height).is_fat);
            assert!(p.succ_family(t).is_antichain());
        }
        let report = validate_condition(&p, &length_schedule(&p, 3));
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn depth_one_has_only_a_trivial_certificate() {
        // One length-1 successor; the slalom {0} at column 0 needs a second,
        // longer pick that does not fit.
        let p = build_condition(1).unwrap();
        assert_eq!(p.succ(p.root()), vec![DigitString::from_slice(&[0])]);
        assert_eq!(p.cert(p.root()).unwrap().height, 0);
    }

    #[test]
    fn deterministic_and_sized() {
        assert_eq!(build_condition(6).unwrap(), build_condition(6).unwrap());
        assert_eq!(build_condition(8).unwrap().len(), 106);
        let p = build_condition(10).unwrap();
        assert_eq!(p.len(), 299);
        assert_eq!(p.inner_nodes().count(), 225);
        assert_eq!(p.cert(p.root()).unwrap().height, 3);
        assert_eq!(p.succ(p.root()).len(), 10);
        assert!(build_condition(0).is_err());
    }
}
