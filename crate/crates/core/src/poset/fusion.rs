//! Deterministic fusion over a finite condition prefix.
//!
//! Round 0 hands the whole condition to the oracle and gets `t_0`. Every later
//! round takes the next `(m, k)` obligation in diagonal order (by `m + k`, then
//! `m`): the `k`-th canonical `(m+1)`-slalom above `t_m`, among those of height
//! at most the height `H_m` to which `succ(t_m)` was certified. If an earlier
//! pick for `t_m` already escapes it, the obligation is discharged and logged
//! without using a round. Otherwise a fresh successor `s` of `t_m` escaping it
//! is chosen, the oracle shrinks the cone above `s` to a condition `q` with
//! root `t`, and `r` is extended into the current dense open set.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::condition::{validate_condition, KSchedule, TreeCondition};
use super::dense::{dense_open_member, extend_into, DenseOpenSpec, Membership};
use super::PosetError;
use crate::fatness::{is_fat, FiniteFamily};
use crate::symbolic::{count_slaloms, escapes, parallel, DigitString, Slalom, SlalomIter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FusionMode {
    Plain,
    ParallelAvoiding,
}

impl FusionMode {
    /// Fatness width required of `succ(t_m)`.
    pub fn width(self, m: usize) -> usize {
        match self {
            FusionMode::Plain => m + 1,
            FusionMode::ParallelAvoiding => m + 2,
        }
    }
}

/// Width of the slaloms `t_m` must eventually have escaped.
pub fn obligation_width(m: usize) -> usize {
    m + 1
}

/// The `i`-th dense open set, cycling through the list; `None` means the whole space.
pub fn dense_open_at(opens: &[DenseOpenSpec], n: usize) -> Option<&DenseOpenSpec> {
    (!opens.is_empty()).then(|| &opens[n % opens.len()])
}

pub struct OracleOutput {
    /// A condition inside the offered cone; its root becomes `t`.
    pub q: TreeCondition,
    /// `r' ⊇ r`.
    pub r_prime: DigitString,
    /// Height to which `succ_q(t)` is fat at the mode width for index `index`.
    pub height: usize,
}

/// Replaces the forcing steps of the fusion argument.
pub trait StepOracle {
    /// `cone` is `p_n` restricted to the fresh successor `s`; `index` is the
    /// index the new root will get.
    fn step(
        &mut self,
        cone: &TreeCondition,
        r: &DigitString,
        index: usize,
        mode: FusionMode,
    ) -> Result<OracleOutput, String>;
}

/// Largest `h ≥ |t|` with `F` `k`-fat to `h` (`None` if not even `|t|`).
pub fn fat_height(f: &FiniteFamily, k: usize, max_height: usize) -> Option<usize> {
    let b = f.base().len();
    if !is_fat(f, k, b).is_fat {
        return None;
    }
    let mut h = b;
    while h < max_height && is_fat(f, k, h + 1).is_fat {
        h += 1;
    }
    Some(h)
}

/// First breadth-first node of the cone with successors (in the avoiding mode
/// also `‖ r` and at least as long as `r`); `r` is lengthened to that node
/// digit by digit, each digit dodging `i + 2 - t(i)`. The height is the one to
/// which the successors that are not dead ends are fat.
#[derive(Clone, Debug, Default)]
pub struct DefaultOracle;

impl StepOracle for DefaultOracle {
    fn step(
        &mut self,
        cone: &TreeCondition,
        r: &DigitString,
        index: usize,
        mode: FusionMode,
    ) -> Result<OracleOutput, String> {
        let admissible = |u: &DigitString| {
            !cone.is_leaf(u)
                && (mode == FusionMode::Plain || (parallel(u, r) && u.len() >= r.len()))
        };
        let t = cone
            .bfs()
            .into_iter()
            .find(admissible)
            .ok_or_else(|| format!("no admissible node above {}", cone.root()))?;
        let q = cone.restrict(&t).map_err(|e| e.to_string())?;
        let r_prime = avoid_extend(r, &t);
        // Certify against the successors that can themselves be continued, so
        // later obligations are not met only by dead ends.
        let live = q.succ_family(&t).filter(|u| has_admissible(&q, u, &r_prime, mode));
        let width = mode.width(index);
        let height = fat_height(&live, width, q.depth())
            .or_else(|| fat_height(&q.succ_family(&t), width, q.depth()))
            .ok_or_else(|| format!("successors of {t} are empty"))?;
        Ok(OracleOutput { r_prime, q, height })
    }
}

/// `r` extended to `|t|` with digits making it parallel to `t` on the new columns.
pub fn avoid_extend(r: &DigitString, t: &DigitString) -> DigitString {
    (r.len()..t.len()).fold(r.clone(), |acc, i| {
        let d = if t.digits()[i] as usize == i + 2 { 1 } else { 0 };
        acc.child(d).expect("0 and 1 are in every alphabet")
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundChecks {
    pub s_parallel_r: bool,
    pub s_long_enough: bool,
    pub r_in_open: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub n: usize,
    /// Obligation served; absent in round 0.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub slalom: Option<Slalom>,
    pub s: DigitString,
    pub t: DigitString,
    pub r: DigitString,
    /// `succ(t_n)` is fat at the mode width up to this height.
    pub height: usize,
    pub q: TreeCondition,
    pub checks: RoundChecks,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Picked(DigitString),
    /// Already escaped by this earlier pick.
    Discharged(DigitString),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationRecord {
    /// Round during which it was served.
    pub round: usize,
    pub m: usize,
    pub k: usize,
    pub slalom: Slalom,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionRun {
    pub mode: FusionMode,
    pub input: TreeCondition,
    pub dense_opens: Vec<DenseOpenSpec>,
    pub rounds: Vec<RoundRecord>,
    pub obligations: Vec<ObligationRecord>,
}

impl FusionRun {
    /// `p' = {t_0, …, t_M}`.
    pub fn p_prime(&self) -> Vec<DigitString> {
        self.rounds.iter().map(|r| r.t.clone()).collect()
    }

    pub fn r(&self) -> Option<&DigitString> {
        self.rounds.last().map(|r| &r.r)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum FusionError {
    #[error("ORACLE_STALL in round {round}: {detail}")]
    OracleStall { round: usize, detail: String, partial: Box<FusionRun> },
    #[error("DEPTH_EXHAUSTED in round {round}: {detail}")]
    DepthExhausted { round: usize, detail: String, partial: Box<FusionRun> },
    #[error("SCHEDULE_EMPTY in round {round}")]
    ScheduleEmpty { round: usize, partial: Box<FusionRun> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl FusionError {
    /// The rounds completed before the failure.
    pub fn partial(&self) -> Option<&FusionRun> {
        match self {
            FusionError::OracleStall { partial, .. }
            | FusionError::DepthExhausted { partial, .. }
            | FusionError::ScheduleEmpty { partial, .. } => Some(partial),
            FusionError::InvalidInput(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FusionConfig {
    pub mode: FusionMode,
    pub steps: usize,
    /// Candidates tried when pushing `r` into a dense open set.
    pub bfs_cap: usize,
}

impl FusionConfig {
    pub fn new(mode: FusionMode, steps: usize) -> Self {
        FusionConfig { mode, steps, bfs_cap: 100_000 }
    }
}

struct NodeState {
    t: DigitString,
    succ: Vec<DigitString>,
    slaloms: SlalomIter,
    count: u128,
    picks: Vec<DigitString>,
}

struct Engine<'a, O: StepOracle> {
    cfg: &'a FusionConfig,
    oracle: &'a mut O,
    p: TreeCondition,
    r: DigitString,
    used: BTreeSet<DigitString>,
    nodes: Vec<NodeState>,
    queue: BinaryHeap<Reverse<(usize, usize, usize)>>,
    run: FusionRun,
}

impl<O: StepOracle> Engine<'_, O> {
    fn open(&self, n: usize) -> Option<&DenseOpenSpec> {
        dense_open_at(&self.run.dense_opens, n)
    }

    /// Oracle call plus bookkeeping shared by every round.
    fn settle(
        &mut self,
        n: usize,
        s: DigitString,
        served: Option<(usize, usize, Slalom)>,
    ) -> Result<(), FusionError> {
        let mode = self.cfg.mode;
        let cone = self.p.restrict(&s).expect("picked node is in p_n");
        let out = match self.oracle.step(&cone, &self.r, n, mode) {
            Ok(o) => o,
            Err(detail) => return Err(self.stall(n, detail)),
        };
        let t = out.q.root().clone();
        if !t.extends(&s) || !out.q.nodes().is_subset(cone.nodes()) || !out.r_prime.extends(&self.r) {
            return Err(self.stall(n, format!("oracle output for {s} leaves the cone or shortens r")));
        }
        let r_new = match self.open(n) {
            Some(v) => extend_into(v, &out.r_prime, self.cfg.bfs_cap),
            None => out.r_prime.clone(),
        };
        let checks = RoundChecks {
            s_parallel_r: parallel(&s, &self.r),
            s_long_enough: s.len() >= self.r.len(),
            r_in_open: self.open(n).is_none_or(|v| dense_open_member(v, &r_new) == Membership::Contained),
        };
        self.p = self.p.replace_cone(&s, &out.q);
        self.used.insert(s.clone());
        let succ = out.q.succ(&t);
        let count = count_slaloms(t.len(), obligation_width(n), out.height);
        self.nodes.push(NodeState {
            slaloms: crate::symbolic::enumerate_slaloms(&t, obligation_width(n), out.height),
            t: t.clone(),
            succ,
            count,
            picks: Vec::new(),
        });
        if count > 0 {
            self.queue.push(Reverse((n, n, 0)));
        }
        let (m, k, slalom) = match served {
            Some((m, k, sl)) => (Some(m), Some(k), Some(sl)),
            None => (None, None, None),
        };
        self.run.rounds.push(RoundRecord {
            n,
            m,
            k,
            slalom,
            s,
            t,
            r: r_new.clone(),
            height: out.height,
            q: out.q,
            checks,
        });
        self.r = r_new;
        Ok(())
    }

    fn stall(&self, round: usize, detail: String) -> FusionError {
        FusionError::OracleStall { round, detail, partial: Box::new(self.run.clone()) }
    }

    /// Next obligation needing a fresh pick; discharged ones are logged.
    fn next_obligation(&mut self, n: usize) -> Option<(usize, usize, Slalom)> {
        while let Some(Reverse((_, m, k))) = self.queue.pop() {
            let node = &mut self.nodes[m];
            let slalom = node.slaloms.next().expect("count bounds the enumeration");
            if (k as u128) + 1 < node.count {
                self.queue.push(Reverse((m + k + 1, m, k + 1)));
            }
            if let Some(by) = node.picks.iter().find(|s| escapes(s, &slalom)) {
                let by = by.clone();
                self.run.obligations.push(ObligationRecord {
                    round: n,
                    m,
                    k,
                    slalom,
                    outcome: Outcome::Discharged(by),
                });
                continue;
            }
            return Some((m, k, slalom));
        }
        None
    }

    fn round(&mut self, n: usize) -> Result<(), FusionError> {
        let Some((m, k, slalom)) = self.next_obligation(n) else {
            return Err(FusionError::ScheduleEmpty { round: n, partial: Box::new(self.run.clone()) });
        };
        let avoiding = self.cfg.mode == FusionMode::ParallelAvoiding;
        let min_len = if avoiding { slalom.height().max(self.r.len()) } else { slalom.height() };
        let node = &self.nodes[m];
        let live: BTreeSet<DigitString> = self.p.succ(&node.t).into_iter().collect();
        let escaping: Vec<&DigitString> = node
            .succ
            .iter()
            .filter(|s| !self.used.contains(*s) && live.contains(*s))
            .filter(|s| s.len() >= min_len && escapes(s, &slalom))
            .filter(|s| !avoiding || parallel(s, &self.r))
            .collect();
        // Shortest first keeps `r` short; among those prefer a successor the
        // oracle can continue from.
        let mut escaping = escaping;
        escaping.sort_by_key(|s| s.len());
        let pick = escaping
            .iter()
            .find(|s| has_admissible(&self.p, s, &self.r, self.cfg.mode))
            .map(|s| (*s).clone());
        let Some(s) = pick else {
            let detail = if escaping.is_empty() {
                format!("no fresh successor of t_{m} = {} escapes {slalom} (|r| = {})", node.t, self.r.len())
            } else {
                format!("the {} successor(s) of t_{m} escaping {slalom} are dead ends", escaping.len())
            };
            return Err(FusionError::DepthExhausted { round: n, detail, partial: Box::new(self.run.clone()) });
        };
        self.settle(n, s.clone(), Some((m, k, slalom.clone())))?;
        self.nodes[m].picks.push(s.clone());
        self.run.obligations.push(ObligationRecord { round: n, m, k, slalom, outcome: Outcome::Picked(s) });
        Ok(())
    }
}

/// Some node above `s` has successors (and, when avoiding, is `‖ r` and at
/// least as long as `r`).
fn has_admissible(p: &TreeCondition, s: &DigitString, r: &DigitString, mode: FusionMode) -> bool {
    std::iter::once(s).chain(p.strict_cone(s)).any(|u| {
        !p.is_leaf(u) && (mode == FusionMode::Plain || (parallel(u, r) && u.len() >= r.len()))
    })
}

/// Runs `cfg.steps` rounds (round 0 included).
pub fn fuse<O: StepOracle>(
    p: &TreeCondition,
    dense_opens: &[DenseOpenSpec],
    cfg: &FusionConfig,
    oracle: &mut O,
) -> Result<FusionRun, FusionError> {
    if cfg.steps == 0 {
        return Err(FusionError::InvalidInput("steps must be at least 1".into()));
    }
    for v in dense_opens {
        v.check().map_err(|e| FusionError::InvalidInput(e.to_string()))?;
    }
    let report = validate_condition(p, &KSchedule::new());
    if !report.passed {
        return Err(FusionError::InvalidInput(format!(
            "condition fails validation at {} node(s)",
            report.failures.len()
        )));
    }
    let mut engine = Engine {
        cfg,
        oracle,
        p: p.clone(),
        r: DigitString::empty(),
        used: BTreeSet::new(),
        nodes: Vec::new(),
        queue: BinaryHeap::new(),
        run: FusionRun {
            mode: cfg.mode,
            input: p.clone(),
            dense_opens: dense_opens.to_vec(),
            rounds: Vec::new(),
            obligations: Vec::new(),
        },
    };
    engine.settle(0, p.root().clone(), None)?;
    for n in 1..cfg.steps {
        engine.round(n)?;
    }
    Ok(engine.run)
}

impl From<PosetError> for FusionError {
    fn from(e: PosetError) -> Self {
        FusionError::InvalidInput(e.to_string())
    }
}
