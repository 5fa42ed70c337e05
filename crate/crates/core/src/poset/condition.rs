use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Bound;

use serde::{Deserialize, Serialize};

use super::PosetError;
use crate::fatness::{is_fat, FiniteFamily};
use crate::symbolic::{DigitString, Slalom};

/// Claimed fatness of a node's successor set: `k`-fat up to `height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCert {
    pub k: usize,
    pub height: usize,
}

/// A finite-depth prefix of a tree condition.
///
/// Children of a node are its minimal proper extensions among `nodes`.
/// Every non-maximal node carries a [`NodeCert`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCondition {
    root: DigitString,
    nodes: BTreeSet<DigitString>,
    annotations: BTreeMap<DigitString, NodeCert>,
}

/// `k ↦` how many non-maximal nodes may fail `k`-fatness.
pub type KSchedule = BTreeMap<usize, usize>;

impl TreeCondition {
    /// Checks that `root` is in `nodes` and below everything; annotations on
    /// leaves or foreign nodes are rejected.
    pub fn new(
        root: DigitString,
        nodes: BTreeSet<DigitString>,
        annotations: BTreeMap<DigitString, NodeCert>,
    ) -> Result<Self, PosetError> {
        if !nodes.contains(&root) {
            return Err(PosetError::NodeAbsent(root));
        }
        if let Some(bad) = nodes.iter().find(|t| !t.extends(&root)) {
            return Err(PosetError::NotATree(format!("{bad} does not extend root {root}")));
        }
        let p = TreeCondition { root, nodes, annotations };
        for t in p.annotations.keys() {
            if !p.nodes.contains(t) || p.is_leaf(t) {
                return Err(PosetError::NotATree(format!("annotation on {t} which is not an inner node")));
            }
        }
        Ok(p)
    }

    /// Annotates every inner node with `1`-fat to height `|t|+1`.
    pub fn from_nodes(nodes: impl IntoIterator<Item = DigitString>) -> Result<Self, PosetError> {
        let nodes: BTreeSet<DigitString> = nodes.into_iter().collect();
        let root = nodes.iter().min_by_key(|t| t.len()).cloned().ok_or(PosetError::Empty)?;
        let mut p = TreeCondition::new(root, nodes, BTreeMap::new())?;
        let inner: Vec<DigitString> = p.nodes.iter().filter(|t| !p.is_leaf(t)).cloned().collect();
        for t in inner {
            let height = t.len() + 1;
            p.annotations.insert(t, NodeCert { k: 1, height });
        }
        Ok(p)
    }

    /// All strings of length at most `depth`.
    pub fn full_prefix(depth: usize) -> Self {
        let fam = FiniteFamily::full(&DigitString::empty(), 0, depth);
        Self::from_nodes(fam.members().iter().cloned()).expect("full prefix is a tree")
    }

    pub fn root(&self) -> &DigitString {
        &self.root
    }

    pub fn nodes(&self) -> &BTreeSet<DigitString> {
        &self.nodes
    }

    pub fn annotations(&self) -> &BTreeMap<DigitString, NodeCert> {
        &self.annotations
    }

    pub fn cert(&self, t: &DigitString) -> Option<NodeCert> {
        self.annotations.get(t).copied()
    }

    pub fn set_cert(&mut self, t: &DigitString, cert: NodeCert) {
        self.annotations.insert(t.clone(), cert);
    }

    pub fn contains(&self, t: &DigitString) -> bool {
        self.nodes.contains(t)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|t| t.len()).max().unwrap_or(0)
    }

    /// Proper extensions of `t` in node order.
    pub fn strict_cone(&self, t: &DigitString) -> impl Iterator<Item = &DigitString> + '_ {
        let t = t.clone();
        self.nodes
            .range((Bound::Excluded(t.clone()), Bound::Unbounded))
            .take_while(move |u| u.extends(&t))
    }

    /// Minimal proper extensions of `t`.
    pub fn succ(&self, t: &DigitString) -> Vec<DigitString> {
        let mut out: Vec<DigitString> = Vec::new();
        for u in self.strict_cone(t) {
            // Prefix-first order: an extension of a kept child follows it directly.
            if out.last().is_some_and(|c| u.extends(c)) {
                continue;
            }
            out.push(u.clone());
        }
        out
    }

    pub fn succ_family(&self, t: &DigitString) -> FiniteFamily {
        FiniteFamily::new(t.clone(), self.succ(t)).expect("successors extend their parent")
    }

    pub fn is_leaf(&self, t: &DigitString) -> bool {
        self.strict_cone(t).next().is_none()
    }

    pub fn inner_nodes(&self) -> impl Iterator<Item = &DigitString> + '_ {
        self.nodes.iter().filter(|t| !self.is_leaf(t))
    }

    /// Tree breadth-first order from the root, children in node order.
    pub fn bfs(&self) -> Vec<DigitString> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut queue = VecDeque::from([self.root.clone()]);
        while let Some(t) = queue.pop_front() {
            queue.extend(self.succ(&t));
            out.push(t);
        }
        out
    }

    /// `p[t]`: the nodes extending `t`, rooted at `t`, annotations inherited.
    pub fn restrict(&self, t: &DigitString) -> Result<TreeCondition, PosetError> {
        if !self.nodes.contains(t) {
            return Err(PosetError::NodeAbsent(t.clone()));
        }
        let nodes: BTreeSet<DigitString> =
            std::iter::once(t.clone()).chain(self.strict_cone(t).cloned()).collect();
        let annotations = self
            .annotations
            .iter()
            .filter(|(u, _)| nodes.contains(*u))
            .map(|(u, c)| (u.clone(), *c))
            .collect();
        Ok(TreeCondition { root: t.clone(), nodes, annotations })
    }

    /// `(self ∖ cone(s)) ∪ q`, where `q` lives inside the cone of `s`.
    pub fn replace_cone(&self, s: &DigitString, q: &TreeCondition) -> TreeCondition {
        let cone: BTreeSet<DigitString> =
            std::iter::once(s.clone()).chain(self.strict_cone(s).cloned()).collect();
        let mut nodes: BTreeSet<DigitString> = self.nodes.difference(&cone).cloned().collect();
        nodes.extend(q.nodes.iter().cloned());
        let mut annotations: BTreeMap<DigitString, NodeCert> =
            self.annotations.iter().filter(|(u, _)| !cone.contains(*u)).map(|(u, c)| (u.clone(), *c)).collect();
        annotations.extend(q.annotations.iter().map(|(u, c)| (u.clone(), *c)));
        let mut p = TreeCondition { root: self.root.clone(), nodes, annotations };
        // Nodes that became leaves lose their certificates.
        let stale: Vec<DigitString> = p.annotations.keys().filter(|u| p.is_leaf(u)).cloned().collect();
        for u in stale {
            p.annotations.remove(&u);
        }
        p
    }
}

/// Height used for a node without an annotation.
fn annotated_height(p: &TreeCondition, t: &DigitString) -> usize {
    p.cert(t).map_or(t.len() + 1, |c| c.height)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeFailure {
    pub node: DigitString,
    /// Which clause failed: `"root"`, `"cert"`, `"one-fat"`, or `"k=<k>"`.
    pub clause: String,
    pub height: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub killer: Option<Slalom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleLine {
    pub k: usize,
    pub allowed: usize,
    pub failing: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub passed: bool,
    pub inner_nodes: usize,
    pub schedule: Vec<ScheduleLine>,
    pub failures: Vec<NodeFailure>,
}

/// Clauses: unique root, each inner node's successors `1`-fat at its annotated
/// height, recorded certificates replay, and for each scheduled `k` at most
/// `schedule[k]` inner nodes fail `k`-fatness.
pub fn validate_condition(p: &TreeCondition, schedule: &KSchedule) -> ConditionReport {
    check_condition(p, schedule, |p, t| p.succ_family(t))
}

/// As [`validate_condition`] but testing the whole cone above each node.
pub fn in_p0(p: &TreeCondition, schedule: &KSchedule) -> ConditionReport {
    check_condition(p, schedule, |p, t| {
        FiniteFamily::new(t.clone(), p.strict_cone(t).cloned()).expect("cone extends its root")
    })
}

fn check_condition(
    p: &TreeCondition,
    schedule: &KSchedule,
    family: impl Fn(&TreeCondition, &DigitString) -> FiniteFamily,
) -> ConditionReport {
    let mut failures = Vec::new();
    let minimal: Vec<&DigitString> =
        p.nodes.iter().filter(|t| !p.nodes.iter().any(|u| u != *t && t.extends(u))).collect();
    if minimal.len() != 1 || minimal[0] != &p.root {
        failures.push(NodeFailure { node: p.root.clone(), clause: "root".into(), height: 0, killer: None });
    }
    let inner: Vec<DigitString> = p.inner_nodes().cloned().collect();
    let mut counts: BTreeMap<usize, usize> = schedule.keys().map(|&k| (k, 0)).collect();
    for t in &inner {
        let fam = family(p, t);
        let height = annotated_height(p, t);
        let one = is_fat(&fam, 1, height);
        if !one.is_fat {
            failures.push(NodeFailure { node: t.clone(), clause: "one-fat".into(), height, killer: one.killer });
        }
        if let Some(c) = p.cert(t) {
            let v = is_fat(&fam, c.k, c.height);
            if !v.is_fat {
                failures.push(NodeFailure { node: t.clone(), clause: "cert".into(), height, killer: v.killer });
            }
        }
        for (&k, count) in counts.iter_mut() {
            let v = is_fat(&fam, k, height);
            if !v.is_fat {
                *count += 1;
                failures.push(NodeFailure { node: t.clone(), clause: format!("k={k}"), height, killer: v.killer });
            }
        }
    }
    let schedule_lines: Vec<ScheduleLine> = schedule
        .iter()
        .map(|(&k, &allowed)| {
            let failing = counts[&k];
            ScheduleLine { k, allowed, failing, passed: failing <= allowed }
        })
        .collect();
    let hard = failures.iter().any(|f| !f.clause.starts_with("k="));
    ConditionReport {
        passed: !hard && schedule_lines.iter().all(|l| l.passed),
        inner_nodes: inner.len(),
        schedule: schedule_lines,
        failures,
    }
}

/// For each `k ≤ k_max`, the number of inner nodes `t` with `|t| + 1 < k`.
///
/// Built conditions certify `(|t|+1)`-fatness at `t`, so these are the only
/// nodes allowed to miss `k`.
pub fn length_schedule(p: &TreeCondition, k_max: usize) -> KSchedule {
    (1..=k_max)
        .map(|k| (k, p.inner_nodes().filter(|t| t.len() + 1 < k).count()))
        .collect()
}

/// `restrict(p, s)` for the first breadth-first node whose successors carry a
/// nontrivial `k`-fat certificate (annotated height above `|s|`).
pub fn strengthen_root(p: &TreeCondition, k: usize) -> Result<TreeCondition, PosetError> {
    for s in p.bfs() {
        if p.is_leaf(&s) {
            continue;
        }
        let height = annotated_height(p, &s);
        if height > s.len() && is_fat(&p.succ_family(&s), k, height).is_fat {
            return p.restrict(&s);
        }
    }
    Err(PosetError::NoFatNode { k })
}

/// `restrict(p, t)` for the first breadth-first node with `|t| ≥ k`.
pub fn extend_root_length(p: &TreeCondition, k: usize) -> Result<TreeCondition, PosetError> {
    let t = p.bfs().into_iter().find(|t| t.len() >= k).ok_or(PosetError::DepthExhausted {
        detail: format!("no node of length {k}"),
    })?;
    p.restrict(&t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BarrierReport {
    pub is_barrier: bool,
    pub is_open: bool,
}

/// Does every root-to-leaf path meet `b`, and is `b` upward closed in `p`?
pub fn barrier_check(b: &BTreeSet<DigitString>, p: &TreeCondition) -> BarrierReport {
    let is_barrier = p
        .nodes
        .iter()
        .filter(|t| p.is_leaf(t))
        .all(|leaf| b.iter().any(|s| leaf.extends(s) && p.contains(s)));
    let is_open = b.iter().all(|s| p.strict_cone(s).all(|t| b.contains(t)));
    BarrierReport { is_barrier, is_open }
}
