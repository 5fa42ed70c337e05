//! Level certificates `B_0, B_1, …` with weights `φ_n`, read off a fusion run.

use serde::{Deserialize, Serialize};

use super::dense::{dense_open_member, DenseOpenSpec, Membership};
use super::fusion::{dense_open_at, fat_height, obligation_width, FusionRun};
use crate::fatness::{is_fat, FiniteFamily};
use crate::symbolic::DigitString;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertLevel {
    pub nodes: Vec<DigitString>,
    /// `φ_n`, aligned with `nodes`.
    pub phi: Vec<usize>,
    /// Height to which each node's children in the next level are `φ_n`-fat.
    /// Empty on the last level.
    #[serde(default)]
    pub heights: Vec<usize>,
    /// `U_n`; `None` is the whole space.
    #[serde(default)]
    pub open: Option<DenseOpenSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BnCertificate {
    pub r: DigitString,
    pub levels: Vec<CertLevel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub clause: u8,
    pub status: ClauseStatus,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertReport {
    pub passed: bool,
    pub clauses: Vec<ClauseResult>,
}

impl CertReport {
    pub fn clause(&self, c: u8) -> Option<&ClauseResult> {
        self.clauses.iter().find(|r| r.clause == c)
    }
}

/// Levels follow the tree of `p'`: the children of `t_m` are the `t_j` whose
/// round served an obligation of `t_m`. `φ(t_m) = m + 1`. Children without
/// children of their own are left out when every parent keeps at least one;
/// levels stop at the first one containing a node without children (that
/// level is kept). Declared heights are measured on the kept children.
pub fn extract_certificate(run: &FusionRun) -> Option<BnCertificate> {
    let r = run.r()?.clone();
    let children = |m: usize| -> Vec<usize> {
        run.rounds.iter().filter(|x| x.m == Some(m)).map(|x| x.n).collect()
    };
    let mut levels = Vec::new();
    let mut current = vec![0usize];
    loop {
        let mut kids: Vec<Vec<usize>> = current.iter().map(|&m| children(m)).collect();
        let last = kids.iter().any(Vec::is_empty);
        if !last {
            let live: Vec<Vec<usize>> = kids
                .iter()
                .map(|ks| ks.iter().copied().filter(|&j| !children(j).is_empty()).collect())
                .collect();
            if live.iter().all(|ks| !ks.is_empty()) {
                kids = live;
            }
        }
        let heights = if last {
            Vec::new()
        } else {
            current
                .iter()
                .zip(&kids)
                .map(|(&m, ks)| {
                    let fam = FiniteFamily::new(
                        run.rounds[m].t.clone(),
                        ks.iter().map(|&j| run.rounds[j].t.clone()),
                    )
                    .expect("children extend their parent");
                    let cap = fam.depth().max(run.rounds[m].t.len());
                    fat_height(&fam, obligation_width(m), cap).unwrap_or(0)
                })
                .collect()
        };
        let n = levels.len();
        levels.push(CertLevel {
            nodes: current.iter().map(|&m| run.rounds[m].t.clone()).collect(),
            phi: current.iter().map(|&m| obligation_width(m)).collect(),
            heights,
            open: dense_open_at(&run.dense_opens, n).cloned(),
        });
        if last {
            break;
        }
        current = kids.into_iter().flatten().collect();
    }
    Some(BnCertificate { r, levels })
}

fn clause(n: u8, failures: Vec<String>) -> ClauseResult {
    let status = if failures.is_empty() { ClauseStatus::Pass } else { ClauseStatus::Fail };
    ClauseResult { clause: n, status, failures }
}

pub fn validate_certificate(c: &BnCertificate) -> CertReport {
    let levels = &c.levels;
    let mut out = Vec::new();

    let size0 = levels.first().map_or(0, |l| l.nodes.len());
    out.push(clause(1, if size0 == 1 { vec![] } else { vec![format!("|B_0| = {size0}")] }));

    let mut f2 = Vec::new();
    for (n, l) in levels.iter().enumerate() {
        for (i, a) in l.nodes.iter().enumerate() {
            for b in &l.nodes[i + 1..] {
                if a.comparable(b) {
                    f2.push(format!("B_{n}: {a} and {b} are comparable"));
                }
            }
        }
    }
    out.push(clause(2, f2));

    let mut f3 = Vec::new();
    for (n, pair) in levels.windows(2).enumerate() {
        for t in &pair[1].nodes {
            if !pair[0].nodes.iter().any(|s| t.extends(s) && t.len() > s.len()) {
                f3.push(format!("{t} ∈ B_{} extends nothing in B_{n}", n + 1));
            }
        }
    }
    out.push(clause(3, f3));

    let mut f4 = Vec::new();
    for (n, l) in levels.iter().enumerate() {
        if l.phi.len() != l.nodes.len() {
            f4.push(format!("φ_{n} has {} values for {} nodes", l.phi.len(), l.nodes.len()));
        }
        for (s, &phi) in l.nodes.iter().zip(&l.phi) {
            if phi <= n {
                f4.push(format!("φ_{n}({s}) = {phi}"));
            }
        }
    }
    out.push(clause(4, f4));

    out.push(ClauseResult { clause: 5, status: ClauseStatus::Vacuous, failures: vec![] });

    let mut f6 = Vec::new();
    for (n, pair) in levels.windows(2).enumerate() {
        let l = &pair[0];
        if l.heights.len() != l.nodes.len() {
            f6.push(format!("B_{n} declares {} heights for {} nodes", l.heights.len(), l.nodes.len()));
            continue;
        }
        for ((s, &phi), &h) in l.nodes.iter().zip(&l.phi).zip(&l.heights) {
            let above: Vec<DigitString> = pair[1].nodes.iter().filter(|t| t.extends(s)).cloned().collect();
            let fat = match FiniteFamily::new(s.clone(), above) {
                Ok(f) => is_fat(&f, phi, h),
                Err(e) => {
                    f6.push(e.to_string());
                    continue;
                }
            };
            if !fat.is_fat {
                f6.push(format!(
                    "children of {s} are not {phi}-fat to height {h}; killer {}",
                    fat.killer.map(|k| k.to_string()).unwrap_or_default()
                ));
            }
        }
    }
    out.push(clause(6, f6));

    let mut f7 = Vec::new();
    for (n, l) in levels.iter().enumerate() {
        if let Some(u) = &l.open {
            if dense_open_member(u, &c.r) != Membership::Contained {
                f7.push(format!("no prefix of r lands inside U_{n}"));
            }
        }
    }
    out.push(clause(7, f7));

    CertReport { passed: out.iter().all(|c| c.status != ClauseStatus::Fail), clauses: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{build_condition, fuse, DefaultOracle, FusionConfig, FusionMode};

    fn cert() -> BnCertificate {
        let p = build_condition(8).unwrap();
        let opens = [DenseOpenSpec::default(), DenseOpenSpec::append(vec![1, 1])];
        let run = fuse(&p, &opens, &FusionConfig::new(FusionMode::Plain, 25), &mut DefaultOracle).unwrap();
        extract_certificate(&run).unwrap()
    }

    #[test]
    fn extracted_certificate_passes() {
        let c = cert();
        let rep = validate_certificate(&c);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.clause(5).unwrap().status, ClauseStatus::Vacuous);
        assert!(c.levels.len() >= 3);
    }

    #[test]
    fn two_roots_fail_clause_one() {
        let mut c = cert();
        let extra = c.levels[1].nodes[0].clone();
        c.levels[0].nodes.push(extra);
        c.levels[0].phi.push(9);
        let rep = validate_certificate(&c);
        assert_eq!(rep.clause(1).unwrap().status, ClauseStatus::Fail);
        assert!(!rep.passed);
    }

    #[test]
    fn small_phi_fails_clause_four() {
        let mut c = cert();
        c.levels[2].phi[0] = 2;
        let rep = validate_certificate(&c);
        assert_eq!(rep.clause(4).unwrap().status, ClauseStatus::Fail);
        assert_eq!(rep.clause(2).unwrap().status, ClauseStatus::Pass);
    }

    #[test]
    fn raised_height_fails_clause_six() {
        let mut c = cert();
        c.levels[0].heights[0] += 3;
        assert_eq!(validate_certificate(&c).clause(6).unwrap().status, ClauseStatus::Fail);
    }

    #[test]
    fn round_trips_through_json() {
        let c = cert();
        let back: BnCertificate = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
