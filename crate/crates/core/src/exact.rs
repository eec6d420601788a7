//! Exhaustive optima used as ground truth for the approximation and
//! relaxation checks, plus the exhaustive segment lower-bound check on cycles.

use std::cmp::Reverse;

use rayon::prelude::*;
use thiserror::Error;

use crate::metric::{gen_cycle, Dist, Group, MetricSpace, ReductionMap};
use crate::pr::{is_exact_pair, pr_cost, pr_cost_outliers, tz2_cost_outliers};
use crate::tz::{cost, cost_by_vertex, LevelChain};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("instance too large for exhaustive search ({what})")]
    TooLarge { what: String },
}

/// Largest number of level assignments `brute_tz` enumerates for `k >= 3`.
const MAX_CHAINS: u64 = 531_441;

fn chain_key(chain: &LevelChain) -> Vec<Vec<usize>> {
    (1..chain.k()).map(|i| chain.level(i)).collect()
}

/// Keeps the lower cost, then the lexicographically smaller key.
fn better<K: Ord>(a: &(u64, K), b: &(u64, K)) -> bool {
    (a.0, &a.1) < (b.0, &b.1)
}

/// Minimum `tz::cost` over every chain `V ⊇ A_1 ⊇ … ⊇ A_{k-1}`, empty levels
/// included. Ties go to the lexicographically smallest `(A_1, A_2, …)`.
pub fn brute_tz(ms: &MetricSpace, k: usize) -> Result<(LevelChain, u64), ExactError> {
    let n = ms.len();
    assert!(k >= 2);
    let total = (k as u64)
        .checked_pow(n as u32)
        .filter(|&t| if k == 2 { n <= 16 } else { t <= MAX_CHAINS });
    let Some(total) = total else {
        return Err(ExactError::TooLarge { what: format!("{k}^{n} level assignments") });
    };
    let best = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut top = vec![0; n];
            for t in top.iter_mut() {
                *t = (code % k as u64) as usize;
                code /= k as u64;
            }
            let chain = LevelChain::from_tops(k, top).expect("digits are below k");
            let c = cost(ms, &chain).0;
            (c, chain_key(&chain), chain)
        })
        .reduce_with(|a, b| {
            if better(&(b.0, &b.1), &(a.0, &a.1)) {
                b
            } else {
                a
            }
        })
        .expect("at least one chain");
    Ok((best.2, best.0))
}

/// Incremental landmark-oracle cost under single-vertex toggles.
struct PrState<'a> {
    ms: &'a MetricSpace,
    n: usize,
    member: Vec<bool>,
    size: usize,
    da: Vec<Option<Dist>>,
    in_r: Vec<bool>,
    r: u64,
}

impl<'a> PrState<'a> {
    fn new(ms: &'a MetricSpace, member: Vec<bool>) -> Self {
        let n = ms.len();
        let da: Vec<Option<Dist>> = (0..n).map(|u| ms.dist_to_set(u, &member)).collect();
        let mut in_r = vec![false; n * n];
        let mut r = 0;
        for u in 0..n {
            for v in u + 1..n {
                if is_exact_pair(ms.d(u, v), da[u], da[v]) {
                    in_r[u * n + v] = true;
                    r += 1;
                }
            }
        }
        let size = member.iter().filter(|&&b| b).count();
        PrState { ms, n, member, size, da, in_r, r }
    }

    fn cost(&self) -> u64 {
        (self.n * self.size) as u64 + self.r
    }

    fn toggle(&mut self, w: usize) {
        let n = self.n;
        self.member[w] = !self.member[w];
        let mut changed = Vec::new();
        if self.member[w] {
            self.size += 1;
            for u in 0..n {
                let d = self.ms.d(u, w);
                if self.da[u].is_none_or(|x| d < x) {
                    self.da[u] = Some(d);
                    changed.push(u);
                }
            }
        } else {
            self.size -= 1;
            for u in 0..n {
                if self.da[u] == Some(self.ms.d(u, w)) {
                    let nd = self.ms.dist_to_set(u, &self.member);
                    if nd != self.da[u] {
                        self.da[u] = nd;
                        changed.push(u);
                    }
                }
            }
        }
        let mut is_changed = vec![false; n];
        for &u in &changed {
            is_changed[u] = true;
        }
        for &u in &changed {
            for v in 0..n {
                if v == u || (is_changed[v] && v < u) {
                    continue;
                }
                let (a, b) = (u.min(v), u.max(v));
                let now = is_exact_pair(self.ms.d(a, b), self.da[a], self.da[b]);
                let slot = &mut self.in_r[a * n + b];
                if now != *slot {
                    if now {
                        self.r += 1;
                    } else {
                        self.r -= 1;
                    }
                    *slot = now;
                }
            }
        }
    }
}

fn mask_members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Minimum of `pr_cost` over all non-empty landmark sets, enumerated in Gray-code order with incremental updates. Ties go to the
/// lexicographically smallest landmark list.
pub fn brute_pr(ms: &MetricSpace) -> Result<(Vec<usize>, u64), ExactError> {
    let n = ms.len();
    if n > 16 {
        return Err(ExactError::TooLarge { what: format!("2^{n} landmark sets") });
    }
    let total = 1u64 << n;
    let chunks = 64u64.min(total);
    let per = total / chunks;
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * per;
            let end = if c + 1 == chunks { total } else { start + per };
            let gray = |i: u64| i ^ (i >> 1);
            let g0 = gray(start);
            let mut st = PrState::new(ms, (0..n).map(|v| g0 >> v & 1 == 1).collect());
            let mut best = if g0 == 0 { (u64::MAX, Vec::new()) } else { (st.cost(), mask_members(g0, n)) };
            for i in start + 1..end {
                let flip = (gray(i) ^ gray(i - 1)).trailing_zeros() as usize;
                st.toggle(flip);
                let c = st.cost();
                if c <= best.0 {
                    let cand = (c, mask_members(gray(i), n));
                    if better(&cand, &best) {
                        best = cand;
                    }
                }
            }
            best
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one chunk");
    Ok((best.1, best.0))
}

/// Minimum of `pr_cost` over landmark sets made of one representative per
/// chosen set group. Returns the landmarks (vertex ids) and the cost.
pub fn brute_pr_normalized(rm: &ReductionMap) -> Result<(Vec<usize>, u64), ExactError> {
    let m = rm.instance.sets().len();
    if m > 12 {
        return Err(ExactError::TooLarge { what: format!("{m} sets (at most 12)") });
    }
    let reps: Vec<usize> = (0..m).map(|s| rm.representative(Group::Set(s))).collect();
    let best = (0..1u64 << m)
        .into_par_iter()
        .map(|mask| {
            let a: Vec<usize> = mask_members(mask, m).into_iter().map(|s| reps[s]).collect();
            (pr_cost(&rm.metric, &a), a)
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one subset");
    Ok((best.1, best.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierProblem {
    Tz2,
    Pr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlierOptimum {
    pub landmarks: Vec<usize>,
    pub outliers: Vec<usize>,
    pub cost: u64,
}

/// Exact optimum over all `F` with `|F| <= f` and all `A ⊆ V \ F`; the cost
/// uses the realized `|F|`. Ties go to the smaller `A` list, then the larger
/// `F`, then the smaller `F` list.
pub fn brute_outliers(ms: &MetricSpace, f: usize, problem: OutlierProblem) -> Result<OutlierOptimum, ExactError> {
    let n = ms.len();
    if n > 10 {
        return Err(ExactError::TooLarge { what: format!("n = {n} (at most 10)") });
    }
    let f = f.min(n);
    let best = (0..1u64 << n)
        .into_par_iter()
        .filter(|fm| fm.count_ones() as usize <= f)
        .map(|fm| {
            let out = mask_members(fm, n);
            let rest = !fm & ((1u64 << n) - 1);
            let mut best: Option<(u64, (Vec<usize>, Reverse<usize>, Vec<usize>))> = None;
            let mut sub = rest;
            loop {
                let a = mask_members(sub, n);
                let c = match problem {
                    OutlierProblem::Tz2 => tz2_cost_outliers(ms, &a, &out, out.len()),
                    OutlierProblem::Pr => pr_cost_outliers(ms, &a, &out, out.len()),
                };
                let cand = (c, (a, Reverse(out.len()), out.clone()));
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            best.expect("the empty landmark set is always tried")
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("F = ∅ is always allowed");
    let (cost, (landmarks, _, outliers)) = best;
    Ok(OutlierOptimum { landmarks, outliers, cost })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SegmentReport {
    /// (chain, segment) combinations checked.
    pub checked: u64,
    pub violations: u64,
    /// Smallest `lhs / bound` seen.
    pub min_ratio: f64,
}

/// Exhaustive check of the cycle segment bound for one `n` and level `l`:
/// for every chain whose `A_l` avoids the segment `[a, b]` (`b - a < n/2`),
/// `Σ_{i <= l} Σ_{u ∈ [a,b]} |R_iu| >= ((b - a + 1) / 4^l)^{1 + 1/l}`.
///
/// `l = 1` enumerates all `A_1` (two-level chains); `l = 2` enumerates all
/// three-level chains.
pub fn segment_bound(n: usize, l: usize) -> Result<SegmentReport, ExactError> {
    let k = l + 1;
    let limit = match l {
        1 => 14,
        2 => 10,
        _ => 0,
    };
    if n > limit || n < 3 {
        return Err(ExactError::TooLarge { what: format!("segment check with l = {l} supports 3 <= n <= {limit}") });
    }
    let ms = gen_cycle(n).expect("n >= 3");
    let total = (k as u64).pow(n as u32);
    let merged = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut top = vec![0; n];
            for t in top.iter_mut() {
                *t = (code % k as u64) as usize;
                code /= k as u64;
            }
            let chain = LevelChain::from_tops(k, top).expect("digits are below k");
            let per = cost_by_vertex(&ms, &chain);
            let mut rep = SegmentReport { checked: 0, violations: 0, min_ratio: f64::INFINITY };
            for a in 0..n {
                let mut lhs = 0u64;
                for b in a..n {
                    if 2 * (b - a) >= n || chain.contains(l, b) {
                        break;
                    }
                    lhs += (0..l).map(|i| per[i][b]).sum::<u64>();
                    let len = (b - a + 1) as f64;
                    let bound = (len / 4f64.powi(l as i32)).powf(1.0 + 1.0 / l as f64);
                    rep.checked += 1;
                    if (lhs as f64) < bound {
                        rep.violations += 1;
                    }
                    rep.min_ratio = rep.min_ratio.min(lhs as f64 / bound);
                }
            }
            rep
        })
        .reduce(
            || SegmentReport { checked: 0, violations: 0, min_ratio: f64::INFINITY },
            |x, y| SegmentReport {
                checked: x.checked + y.checked,
                violations: x.violations + y.violations,
                min_ratio: x.min_ratio.min(y.min_ratio),
            },
        );
    Ok(merged)
}
