use serde::{Deserialize, Serialize};

use super::membership::{in_attractor, product_avoids_with, shadow, Exact, DESCENT_CAP};
use super::AvoidError;
use crate::fractal::{attractor_cover, choose_n, similarity_dimension, Interval, IntervalCover, SimilarIfs, DEFAULT_COVER_CAP};
use crate::scalar::Scalar;

/// Closed intervals that do not even share an endpoint.
fn apart<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> bool {
    a.hi < b.lo || b.hi < a.lo
}

fn pairwise_apart<T: Scalar>(ivs: &[Interval<T>]) -> bool {
    ivs.iter().enumerate().all(|(i, a)| ivs[i + 1..].iter().all(|b| apart(a, b)))
}

/// Cell `j` of `2^g` equal closed cells of `iv`.
fn dyadic_piece<T: Scalar>(iv: &Interval<T>, g: usize, j: usize) -> Interval<T> {
    let parts = T::from_int(1i64 << g);
    let w = iv.length() / parts;
    let lo = iv.lo.clone() + w.clone() * T::from_int(j as i64);
    Interval { hi: lo.clone() + w, lo }
}

/// Odometer over `lens[0] × lens[1] × …` in lexicographic order.
fn next_tuple(idx: &mut [usize], lens: &[usize]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < lens[i] {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Disjoint closed `I_i ⊆ J_i`, interiors meeting `P`, with `∏ (I_i ∩ P)`
/// certified to miss `F_N`; returns them with the certifying cover depth.
///
/// Already certified, disjoint input comes back unchanged. Otherwise, for
/// `g = 1, 2, …, budget`, each `J_i` is cut into `2^g` equal closed cells,
/// cells whose interior misses `P` are dropped, and tuples of cells are tried
/// in lexicographic order (cell index within `J_0` varying slowest) against
/// the depth-`g` cover of `K'`.
pub fn shrink_step<T: Scalar>(
    js: &[Interval<T>],
    p: &IntervalCover<T>,
    k_prime: &SimilarIfs<T>,
    budget: usize,
) -> Result<(Vec<Interval<T>>, usize), AvoidError> {
    shrink_with(js, p, &cover_ladder(k_prime, budget)?)
}

/// Covers of `K'` at depths `1..=budget`.
fn cover_ladder<T: Scalar>(k_prime: &SimilarIfs<T>, budget: usize) -> Result<Vec<IntervalCover<T>>, AvoidError> {
    Ok((1..=budget).map(|g| attractor_cover(k_prime, g, DEFAULT_COVER_CAP)).collect::<Result<_, _>>()?)
}

fn shrink_with<T: Scalar>(
    js: &[Interval<T>],
    p: &IntervalCover<T>,
    covers: &[IntervalCover<T>],
) -> Result<(Vec<Interval<T>>, usize), AvoidError> {
    let budget = covers.len();
    if let Some(j) = js.iter().find(|j| !p.meets_interior(j)) {
        return Err(AvoidError::Precondition(format!("{j} has no interior point of P")));
    }
    if pairwise_apart(js) {
        for (g, c) in covers.iter().enumerate() {
            if product_avoids_with(js, p, c)? {
                return Ok((js.to_vec(), g + 1));
            }
        }
    }
    for (g, k_cover) in (1..=budget).zip(covers) {
        let mut pieces: Vec<Vec<(Interval<T>, IntervalCover<T>)>> = Vec::with_capacity(js.len());
        for j in js {
            let mut row = Vec::new();
            for c in 0..1usize << g {
                let piece = dyadic_piece(j, g, c);
                if p.meets_interior(&piece) {
                    let s = shadow(&piece, p, k_cover)?;
                    row.push((piece, s));
                }
            }
            pieces.push(row);
        }
        let lens: Vec<usize> = pieces.iter().map(Vec::len).collect();
        let mut idx = vec![0usize; js.len()];
        loop {
            let chosen: Vec<&(Interval<T>, IntervalCover<T>)> =
                idx.iter().zip(&pieces).map(|(&c, row)| &row[c]).collect();
            let ivs: Vec<Interval<T>> = chosen.iter().map(|(iv, _)| iv.clone()).collect();
            if pairwise_apart(&ivs) {
                let mut acc = chosen[0].1.clone();
                for (_, s) in &chosen[1..] {
                    if acc.is_empty() {
                        break;
                    }
                    acc = acc.intersect(s);
                }
                if acc.is_empty() {
                    return Ok((ivs, g));
                }
            }
            if !next_tuple(&mut idx, &lens) {
                break;
            }
        }
    }
    Err(AvoidError::ResolutionExhausted { budget })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleCert {
    /// Indices into the level, increasing.
    pub cells: Vec<usize>,
    /// Cover depth at which the product was certified.
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CantorScheme<T> {
    pub n: usize,
    pub p: IntervalCover<T>,
    pub k_prime: SimilarIfs<T>,
    pub levels: Vec<Vec<Interval<T>>>,
    /// `certificates[k]` certifies every `N`-tuple of distinct cells of `L_k`.
    pub certificates: Vec<Vec<TupleCert>>,
}

impl<T: Scalar> CantorScheme<T> {
    pub fn depth(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn bottom(&self) -> &[Interval<T>] {
        self.levels.last().map_or(&[], Vec::as_slice)
    }
}

#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub n: usize,
    pub depth: usize,
    /// Largest dyadic level (and cover depth) tried per tuple.
    pub budget: usize,
    /// Refuse levels with more `N`-tuples than this.
    pub tuple_cap: u128,
}

impl SchemeConfig {
    pub fn new(n: usize, depth: usize) -> Self {
        SchemeConfig { n, depth, budget: 12, tuple_cap: 1 << 20 }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<(), AvoidError>) -> Result<(), AvoidError> {
    if k > n {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return Ok(());
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `N` children of `iv` centred at the `(j + 1/2)/N` quantiles of the length
/// of `P ∩ iv`, each of radius `min(m/(4N), 1/(2(level+1)))` where `m` is that
/// length, clipped to `iv`.
fn children<T: Scalar>(iv: &Interval<T>, p: &IntervalCover<T>, n: usize, level: usize) -> Result<Vec<Interval<T>>, AvoidError> {
    let part = p.clip(iv);
    let mass = part.total_length();
    if mass <= T::zero() {
        return Err(AvoidError::Precondition(format!("{iv} meets P in a null set")));
    }
    let nn = T::from_int(n as i64);
    let cap = T::one() / T::from_int(2 * (level as i64 + 1));
    let by_mass = mass.clone() / (T::from_int(4) * nn.clone());
    let rho = if by_mass < cap { by_mass } else { cap };
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let target = mass.clone() * T::from_int(2 * j as i64 + 1) / (T::from_int(2) * nn.clone());
        let mut acc = T::zero();
        let mut q = None;
        for piece in part.intervals() {
            let len = piece.length();
            if acc.clone() + len.clone() >= target {
                q = Some(piece.lo.clone() + (target.clone() - acc.clone()));
                break;
            }
            acc = acc + len;
        }
        let q = q.expect("target below total mass");
        let child = Interval { lo: q.clone() - rho.clone(), hi: q + rho.clone() };
        out.push(child.intersect(iv).expect("centre lies in the parent"));
    }
    Ok(out)
}

/// Levels `L_0 … L_D`: `L_0` is the hull of `P` (cut to length 1), each cell
/// gets `N` children, and then every `N`-tuple of distinct cells of the new
/// level, in lexicographic order, is passed through [`shrink_step`].
pub fn build_scheme<T: Scalar>(
    p: &IntervalCover<T>,
    k_prime: &SimilarIfs<T>,
    cfg: &SchemeConfig,
) -> Result<CantorScheme<T>, AvoidError> {
    let dim = similarity_dimension(k_prime)?;
    let required = choose_n(&dim.value)?.n as usize;
    if cfg.n < required {
        return Err(AvoidError::NBelowChoice { n: cfg.n, required });
    }
    let hull = p.hull().ok_or_else(|| AvoidError::Precondition("P is empty".into()))?;
    let root = if hull.length() > T::one() {
        Interval { hi: hull.lo.clone() + T::one(), lo: hull.lo }
    } else {
        hull
    };
    if !p.meets_interior(&root) {
        return Err(AvoidError::Precondition("P has no interior in its first unit".into()));
    }
    let mut levels = vec![vec![root]];
    let mut certificates = vec![Vec::new()];
    let mut ladder = None;
    for k in 1..=cfg.depth {
        let count = (cfg.n as u128).saturating_pow(k as u32);
        let tuples = binomial(count, cfg.n as u128);
        if tuples > cfg.tuple_cap {
            return Err(AvoidError::BudgetExceeded { count: tuples, cap: cfg.tuple_cap });
        }
        let mut level = Vec::with_capacity(count as usize);
        for iv in &levels[k - 1] {
            level.extend(children(iv, p, cfg.n, k)?);
        }
        let mut certs = Vec::new();
        let ladder = match &ladder {
            Some(l) => l,
            None => ladder.insert(cover_ladder(k_prime, cfg.budget)?),
        };
        for_each_subset(level.len(), cfg.n, |cells| {
            let js: Vec<Interval<T>> = cells.iter().map(|&c| level[c].clone()).collect();
            let (is, depth) = shrink_with(&js, p, ladder)?;
            for (&c, iv) in cells.iter().zip(is) {
                level[c] = iv;
            }
            certs.push(TupleCert { cells: cells.to_vec(), depth });
            Ok(())
        })?;
        levels.push(level);
        certificates.push(certs);
    }
    Ok(CantorScheme { n: cfg.n, p: p.clone(), k_prime: k_prime.clone(), levels, certificates })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeClause {
    pub clause: u8,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub passed: bool,
    pub clauses: Vec<SchemeClause>,
}

fn clause(n: u8, failures: Vec<String>) -> SchemeClause {
    SchemeClause { clause: n, passed: failures.is_empty(), failures }
}

/// Replays the six scheme properties from the scheme alone.
pub fn validate_scheme<T: Scalar>(s: &CantorScheme<T>) -> Result<SchemeReport, AvoidError> {
    let n = s.n;
    let mut f = vec![Vec::new(); 6];
    for (k, level) in s.levels.iter().enumerate() {
        let want = (n as u128).saturating_pow(k as u32);
        if level.len() as u128 != want {
            f[0].push(format!("|L_{k}| = {}, expected {want}", level.len()));
        }
        if !pairwise_apart(level) {
            f[0].push(format!("L_{k} has overlapping cells"));
        }
        for iv in level {
            if !s.p.meets_interior(iv) {
                f[3].push(format!("{iv} in L_{k} has no interior point of P"));
            }
            if iv.length() * T::from_int(k as i64 + 1) > T::one() {
                f[4].push(format!("{iv} in L_{k} is longer than 1/{}", k + 1));
            }
        }
    }
    for (k, pair) in s.levels.windows(2).enumerate() {
        for c in &pair[1] {
            if !pair[0].iter().any(|iv| iv.contains_interval(c)) {
                f[1].push(format!("{c} in L_{} lies in no cell of L_{k}", k + 1));
            }
        }
        for iv in &pair[0] {
            let kids = pair[1].iter().filter(|c| iv.contains_interval(c)).count();
            if kids != n {
                f[2].push(format!("{iv} in L_{k} has {kids} children"));
            }
        }
    }
    let max_depth = s.certificates.iter().flatten().map(|c| c.depth).max().unwrap_or(0);
    let covers = (0..=max_depth)
        .map(|d| attractor_cover(&s.k_prime, d, DEFAULT_COVER_CAP))
        .collect::<Result<Vec<_>, _>>()?;
    for (k, level) in s.levels.iter().enumerate() {
        let certs = s.certificates.get(k).map_or(&[][..], Vec::as_slice);
        for_each_subset(level.len(), n, |cells| {
            let Some(c) = certs.iter().find(|c| c.cells == cells) else {
                f[5].push(format!("L_{k}: no certificate for cells {cells:?}"));
                return Ok(());
            };
            let ivs: Vec<Interval<T>> = cells.iter().map(|&i| level[i].clone()).collect();
            if !product_avoids_with(&ivs, &s.p, &covers[c.depth])? {
                f[5].push(format!("L_{k}: cells {cells:?} fail at depth {}", c.depth));
            }
            Ok(())
        })?;
    }
    let clauses: Vec<SchemeClause> = f.into_iter().enumerate().map(|(i, v)| clause(i as u8 + 1, v)).collect();
    Ok(SchemeReport { passed: clauses.iter().all(|c| c.passed), clauses })
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellVerdict<T> {
    /// `(I ∩ P)` and `K' + r` have disjoint covers.
    Disjoint,
    /// An exact point of `(I ∩ P) ∩ (K' + r)`.
    Hit { point: T },
    /// Covers meet; no exact common point found.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct HitReport<T> {
    /// Cells not certified disjoint from `K' + r`.
    pub count: usize,
    /// Cells with an exact hit.
    pub exact_hits: usize,
    pub check_depth: usize,
    #[serde(serialize_with = "ser_cells")]
    pub cells: Vec<CellVerdict<T>>,
}

fn ser_cells<T: Scalar, S: serde::Serializer>(cells: &[CellVerdict<T>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(cells.len()))?;
    for c in cells {
        let text = match c {
            CellVerdict::Disjoint => "DISJOINT".to_string(),
            CellVerdict::Hit { point } => format!("HIT {}", point.to_text()),
            CellVerdict::Unresolved => "UNRESOLVED".to_string(),
        };
        seq.serialize_element(&text)?;
    }
    seq.end()
}

/// Bottom-level cells whose `(I ∩ P)` cover meets the depth-`d` cover of
/// `K' + r`. For those, endpoints of the `K'` cover (points of `K'`) shifted by
/// `r` are tried as exact hits.
pub fn translate_hit_count<T: Scalar>(
    s: &CantorScheme<T>,
    r: &T,
    check_depth: usize,
) -> Result<HitReport<T>, AvoidError> {
    let k_cover = attractor_cover(&s.k_prime, check_depth, DEFAULT_COVER_CAP)?;
    let shifted = k_cover.translate(r);
    let mut cells = Vec::with_capacity(s.bottom().len());
    for iv in s.bottom() {
        let part = s.p.clip(iv);
        if part.disjoint(&shifted) {
            cells.push(CellVerdict::Disjoint);
            continue;
        }
        let hit = shifted
            .intervals()
            .iter()
            .flat_map(|c| [c.lo.clone(), c.hi.clone()])
            .find(|x| {
                part.contains(x) && in_attractor(&s.k_prime, &(x.clone() - r.clone()), DESCENT_CAP) == Exact::In
            });
        cells.push(match hit {
            Some(point) => CellVerdict::Hit { point },
            None => CellVerdict::Unresolved,
        });
    }
    let count = cells.iter().filter(|c| !matches!(c, CellVerdict::Disjoint)).count();
    let exact_hits = cells.iter().filter(|c| matches!(c, CellVerdict::Hit { .. })).count();
    Ok(HitReport { count, exact_hits, check_depth, cells })
}
