//! Re-derives every `p_n` from the recorded rounds and checks the fusion
//! invariants without trusting the engine's own state.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::condition::TreeCondition;
use super::dense::{dense_open_member, Membership};
use super::fusion::{dense_open_at, obligation_width, FusionMode, FusionRun, Outcome};
use crate::fatness::is_fat;
use crate::symbolic::{enumerate_slaloms, escapes, parallel, DigitString, Slalom, SlalomIter};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub passed: bool,
    pub rounds: usize,
    pub checks: Vec<InvariantCheck>,
}

impl InvariantReport {
    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct Ledger(BTreeMap<&'static str, (usize, Vec<String>)>);

impl Ledger {
    fn record(&mut self, name: &'static str, ok: bool, why: impl FnOnce() -> String) {
        let e = self.0.entry(name).or_default();
        e.0 += 1;
        if !ok && e.1.len() < 20 {
            e.1.push(why());
        }
    }
}

const NAMES: [&str; 13] = [
    "nodes_kept",
    "succ_kept",
    "fat",
    "descending",
    "q_is_restriction",
    "r_parallel",
    "r_in_open",
    "r_extends",
    "s_injective",
    "cone_local",
    "pick_legal",
    "oracle_legal",
    "obligations",
];

fn outside<'a>(p: &'a TreeCondition, s: &'a DigitString) -> impl Iterator<Item = &'a DigitString> + 'a {
    p.nodes().iter().filter(move |u| !u.extends(s))
}

pub fn replay_run(run: &FusionRun) -> InvariantReport {
    let mut l = Ledger::default();
    let avoiding = run.mode == FusionMode::ParallelAvoiding;
    let mut p = run.input.clone();
    let mut r = DigitString::empty();
    let mut used: BTreeSet<DigitString> = BTreeSet::new();
    // succ_{p_m}(t_m) as first seen.
    let mut first_succ: Vec<Vec<DigitString>> = Vec::new();
    let canonical = |m: usize, k: usize| -> Option<Slalom> {
        let t = &run.rounds.get(m)?.t;
        enumerate_slaloms(t, obligation_width(m), run.rounds[m].height).nth(k)
    };

    for (n, rec) in run.rounds.iter().enumerate() {
        l.record("pick_legal", rec.n == n, || format!("round {n} is labelled {}", rec.n));
        if n == 0 {
            l.record("pick_legal", &rec.s == p.root() && rec.m.is_none(), || {
                format!("round 0 must start at the root {}", p.root())
            });
        } else {
            match (rec.m, rec.k, &rec.slalom) {
                (Some(m), Some(k), Some(sl)) if m < n => {
                    let tm = &run.rounds[m].t;
                    l.record("pick_legal", p.succ(tm).contains(&rec.s), || {
                        format!("s_{n} = {} is not a successor of t_{m} in p_{}", rec.s, n - 1)
                    });
                    l.record("pick_legal", escapes(&rec.s, sl), || format!("s_{n} does not escape {sl}"));
                    l.record("pick_legal", canonical(m, k).as_ref() == Some(sl), || {
                        format!("{sl} is not canonical slalom {k} above t_{m}")
                    });
                    if avoiding {
                        l.record("pick_legal", parallel(&rec.s, &r) && rec.s.len() >= r.len(), || {
                            format!("s_{n} = {} is not parallel to r_{} = {r} or too short", rec.s, n - 1)
                        });
                    }
                }
                _ => l.record("pick_legal", false, || format!("round {n} names no valid obligation")),
            }
        }
        l.record("s_injective", used.insert(rec.s.clone()), || format!("s_{n} = {} repeats", rec.s));

        let cone = match p.restrict(&rec.s) {
            Ok(c) => c,
            Err(e) => {
                l.record("oracle_legal", false, || format!("round {n}: {e}"));
                break;
            }
        };
        let q_ok = rec.q.root() == &rec.t && rec.t.extends(&rec.s) && rec.q.nodes().is_subset(cone.nodes());
        l.record("oracle_legal", q_ok, || format!("q_{n} is not a condition inside the cone of s_{n}"));
        l.record("r_extends", rec.r.extends(&r), || format!("r_{n} does not extend r_{}", n.saturating_sub(1)));

        let next = p.replace_cone(&rec.s, &rec.q);
        l.record("descending", next.nodes().is_subset(p.nodes()), || format!("p_{n} is not below p_{}", n.saturating_sub(1)));
        l.record("cone_local", outside(&next, &rec.s).eq(outside(&p, &rec.s)), || {
            format!("round {n} changed p outside the cone of s_{n}")
        });
        p = next;
        r = rec.r.clone();

        let q_now = p.restrict(&rec.t).ok();
        l.record("q_is_restriction", q_now.as_ref().map(TreeCondition::nodes) == Some(rec.q.nodes()), || {
            format!("q_{n} differs from p_{n} restricted to t_{n}")
        });
        let fat = rec.height >= rec.t.len() && is_fat(&p.succ_family(&rec.t), run.mode.width(n), rec.height).is_fat;
        l.record("fat", fat, || {
            format!("succ(t_{n}) is not {}-fat to height {}", run.mode.width(n), rec.height)
        });
        first_succ.push(p.succ(&rec.t));
        let open_ok = dense_open_at(&run.dense_opens, n).is_none_or(|v| dense_open_member(v, &r) == Membership::Contained);
        l.record("r_in_open", open_ok, || format!("[r_{n}] is not inside V_{n}"));

        for (m, tm) in run.rounds[..=n].iter().map(|x| &x.t).enumerate() {
            l.record("nodes_kept", p.contains(tm), || format!("t_{m} left p_{n}"));
            let now: BTreeSet<DigitString> = p.succ(tm).into_iter().collect();
            let lost = first_succ[m].iter().find(|s| !used.contains(*s) && !now.contains(*s));
            l.record("succ_kept", lost.is_none(), || format!("successor {} of t_{m} lost by p_{n}", lost.unwrap()));
            if avoiding {
                l.record("r_parallel", parallel(&r, tm) && r.len() >= tm.len(), || {
                    format!("r_{n} = {r} is not parallel to t_{m} = {tm} or too short")
                });
            }
        }
    }

    // Obligation log: consecutive canonical indices per node, each escaped by a pick.
    let mut iters: BTreeMap<usize, (usize, SlalomIter)> = BTreeMap::new();
    for (i, ob) in run.obligations.iter().enumerate() {
        let Some(base) = run.rounds.get(ob.m) else {
            l.record("obligations", false, || format!("entry {i} names unknown node {}", ob.m));
            continue;
        };
        let (next_k, it) = iters
            .entry(ob.m)
            .or_insert_with(|| (0, enumerate_slaloms(&base.t, obligation_width(ob.m), base.height)));
        let expected = it.next();
        l.record("obligations", ob.k == *next_k && expected.as_ref() == Some(&ob.slalom), || {
            format!("entry {i}: ({}, {}) is not the next canonical slalom above t_{}", ob.m, ob.k, ob.m)
        });
        *next_k += 1;
        let picks: Vec<(usize, &DigitString)> = run
            .rounds
            .iter()
            .filter(|x| x.m == Some(ob.m))
            .map(|x| (x.n, &x.t))
            .collect();
        l.record("obligations", picks.iter().any(|(_, t)| escapes(t, &ob.slalom)), || {
            format!("({}, {}) {} is escaped by no child of t_{}", ob.m, ob.k, ob.slalom, ob.m)
        });
        let outcome_ok = match &ob.outcome {
            Outcome::Picked(s) => run
                .rounds
                .get(ob.round)
                .is_some_and(|x| &x.s == s && x.m == Some(ob.m) && x.k == Some(ob.k)),
            Outcome::Discharged(by) => run
                .rounds
                .iter()
                .any(|x| x.n < ob.round && x.m == Some(ob.m) && &x.s == by && escapes(by, &ob.slalom)),
        };
        l.record("obligations", outcome_ok, || format!("entry {i}: outcome does not match the rounds"));
    }
    let picked = run.obligations.iter().filter(|o| matches!(o.outcome, Outcome::Picked(_))).count();
    l.record("obligations", picked + 1 == run.rounds.len().max(1), || {
        format!("{picked} picks logged for {} rounds", run.rounds.len())
    });

    let checks: Vec<InvariantCheck> = NAMES
        .iter()
        .filter(|n| avoiding || **n != "r_parallel")
        .map(|name| {
            let (checked, failures) = l.0.remove(name).unwrap_or_default();
            InvariantCheck { name: name.to_string(), checked, failures }
        })
        .collect();
    InvariantReport {
        passed: !run.rounds.is_empty() && checks.iter().all(|c| c.failures.is_empty()),
        rounds: run.rounds.len(),
        checks,
    }
}
