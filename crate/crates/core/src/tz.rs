//! Thorup-Zwick level chains, bunches, pivots and the stretch-(2k-1) query.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::{format_id_list, parse_id_list, Dist, MetricSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TzError {
    #[error("level A_{0} is empty; queries need every A_i with i < k non-empty")]
    EmptyLevel(usize),
    #[error("the landmark set must not be empty")]
    EmptySet,
    #[error("invalid chain: {0}")]
    InvalidChain(String),
}

/// Nested levels `V = A_0 ⊇ A_1 ⊇ … ⊇ A_k = ∅`.
///
/// Stored as the top level of every vertex: `v ∈ A_i` iff `top[v] >= i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelChain {
    k: usize,
    top: Vec<usize>,
}

impl LevelChain {
    /// Chain with `A_1 = a1` and `k = 2`.
    pub fn two_level(n: usize, a1: &[usize]) -> Self {
        let mut top = vec![0; n];
        for &v in a1 {
            top[v] = 1;
        }
        LevelChain { k: 2, top }
    }

    /// Builds a chain from the intermediate levels `A_1..A_{k-1}`.
    pub fn from_levels(n: usize, k: usize, inner: &[Vec<usize>]) -> Result<Self, TzError> {
        if k == 0 {
            return Err(TzError::InvalidChain("k must be at least 1".into()));
        }
        if inner.len() != k - 1 {
            return Err(TzError::InvalidChain(format!(
                "expected {} intermediate levels, got {}",
                k - 1,
                inner.len()
            )));
        }
        let mut top = vec![0; n];
        for (idx, level) in inner.iter().enumerate() {
            let i = idx + 1;
            for &v in level {
                if v >= n {
                    return Err(TzError::InvalidChain(format!("vertex {v} out of range")));
                }
                if top[v] != i - 1 {
                    return Err(TzError::InvalidChain(format!(
                        "vertex {} is in A_{i} but not in A_{}",
                        v + 1,
                        i - 1
                    )));
                }
                top[v] = i;
            }
        }
        Ok(LevelChain { k, top })
    }

    /// Builds a chain directly from per-vertex top levels (each `< k`).
    pub fn from_tops(k: usize, top: Vec<usize>) -> Result<Self, TzError> {
        if k == 0 || top.iter().any(|&t| t >= k) {
            return Err(TzError::InvalidChain("top level must be below k".into()));
        }
        Ok(LevelChain { k, top })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.top.len()
    }

    pub fn tops(&self) -> &[usize] {
        &self.top
    }

    #[inline]
    pub fn contains(&self, i: usize, v: usize) -> bool {
        self.top[v] >= i
    }

    pub fn level_mask(&self, i: usize) -> Vec<bool> {
        self.top.iter().map(|&t| t >= i).collect()
    }

    /// Members of `A_i`, sorted.
    pub fn level(&self, i: usize) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.contains(i, v)).collect()
    }

    /// First empty level among `A_1..A_{k-1}`, if any.
    pub fn first_empty_level(&self) -> Option<usize> {
        (1..self.k).find(|&i| !self.top.iter().any(|&t| t >= i))
    }

    /// One line per level `A_0..A_k` with 1-based ids; `A_k` is the empty last line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..=self.k {
            out.push_str(&format_id_list(&self.level(i)));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, n: usize) -> Result<Self, TzError> {
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.last() == Some(&"") {
            lines.pop();
        }
        if lines.len() < 2 {
            return Err(TzError::InvalidChain("need at least the lines A_0 and A_k".into()));
        }
        let k = lines.len() - 1;
        let parse = |line: &str| {
            parse_id_list(line, n).map_err(|e| TzError::InvalidChain(e.to_string()))
        };
        if parse(lines[0])?.len() != n {
            return Err(TzError::InvalidChain("A_0 must list every vertex".into()));
        }
        if !parse(lines[k])?.is_empty() {
            return Err(TzError::InvalidChain("A_k must be empty".into()));
        }
        let inner = lines[1..k]
            .iter()
            .map(|l| parse(l))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_levels(n, k, &inner)
    }
}

/// Samples a chain: each member of `A_{i-1}` joins `A_i` with probability `n^{-1/k}`.
///
/// Samples with an empty `A_{k-1}` are redrawn up to 100 times; after that one
/// uniformly random vertex of the last non-empty level is pushed into every
/// empty level.
pub fn sample_levels(ms: &MetricSpace, k: usize, seed: u64) -> LevelChain {
    assert!(k >= 1, "k must be at least 1");
    let n = ms.len();
    let p = (n as f64).powf(-1.0 / k as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = LevelChain { k, top: vec![0; n] };
    for _ in 0..100 {
        for t in chain.top.iter_mut() {
            *t = 0;
            while *t + 1 < k && rng.gen_bool(p) {
                *t += 1;
            }
        }
        if chain.first_empty_level().is_none() {
            return chain;
        }
    }
    if let Some(first_empty) = chain.first_empty_level() {
        let candidates = chain.level(first_empty - 1);
        let v = candidates[rng.gen_range(0..candidates.len())];
        chain.top[v] = k - 1;
    }
    chain
}

/// Cost of the chain: `Σ_i Σ_u |R_iu|` where
/// `R_iu = {v ∈ A_{i-1} : d(u,v) < min_{w ∈ A_i} d(u,w)}` (empty min is ∞).
///
/// Returns the total and the per-level sums `[level 1, …, level k]`.
pub fn cost(ms: &MetricSpace, chain: &LevelChain) -> (u64, Vec<u64>) {
    let per_level: Vec<u64> = cost_by_vertex(ms, chain)
        .iter()
        .map(|level| level.iter().sum())
        .collect();
    (per_level.iter().sum(), per_level)
}

/// `|R_iu|` indexed as `[i - 1][u]`.
pub fn cost_by_vertex(ms: &MetricSpace, chain: &LevelChain) -> Vec<Vec<u64>> {
    let k = chain.k();
    let n = ms.len();
    let mut out = vec![vec![0u64; n]; k];
    for u in 0..n {
        let row = ms.row(u);
        let sorted = ms.sorted_from(u);
        for i in 1..=k {
            let limit = sorted
                .iter()
                .find(|&&w| chain.contains(i, w as usize))
                .map(|&w| row[w as usize]);
            out[i - 1][u] = sorted
                .iter()
                .map(|&v| v as usize)
                .take_while(|&v| limit.is_none_or(|m| row[v] < m))
                .filter(|&v| chain.contains(i - 1, v))
                .count() as u64;
        }
    }
    out
}

/// `n |A_1| + Σ_u min_{w ∈ A_1} |{v : d(u,v) < d(u,w)}|`, the two-level cost
/// written as a facility location objective.
pub fn tz2_cost_closed_form(ms: &MetricSpace, a1: &[usize]) -> Result<u64, TzError> {
    if a1.is_empty() {
        return Err(TzError::EmptySet);
    }
    let n = ms.len() as u64;
    let connection: u64 = (0..ms.len())
        .map(|u| {
            a1.iter()
                .map(|&w| ms.strict_closer_count(u, w) as u64)
                .min()
                .unwrap_or(0)
        })
        .sum();
    Ok(n * a1.len() as u64 + connection)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BunchEntry {
    pub vertex: usize,
    pub dist: Dist,
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pivot {
    pub vertex: usize,
    pub dist: Dist,
}

/// The Thorup-Zwick structure for a fixed chain.
#[derive(Debug, Clone)]
pub struct TzOracle {
    chain: LevelChain,
    /// Per vertex, bunch entries sorted by vertex id.
    bunches: Vec<Vec<BunchEntry>>,
    /// Per vertex, pivots `p_1..p_{k-1}` (index 0 holds `p_1`).
    pivots: Vec<Vec<Pivot>>,
}

impl TzOracle {
    pub fn build(ms: &MetricSpace, chain: &LevelChain) -> Result<Self, TzError> {
        if let Some(i) = chain.first_empty_level() {
            return Err(TzError::EmptyLevel(i));
        }
        let k = chain.k();
        let n = ms.len();
        let mut bunches = Vec::with_capacity(n);
        let mut pivots = Vec::with_capacity(n);
        for u in 0..n {
            let row = ms.row(u);
            let mut piv = Vec::with_capacity(k.saturating_sub(1));
            for i in 1..k {
                let (vertex, dist) = ms
                    .nearest_in(u, &chain.level_mask(i))
                    .expect("non-empty level checked above");
                piv.push(Pivot { vertex, dist });
            }
            let mut bunch = Vec::new();
            for v in 0..n {
                let level = chain.top[v] + 1;
                // v ∈ A_{level-1} \ A_level, so only R_{level,u} can hold it.
                let bound = if level < k { Some(piv[level - 1].dist) } else { None };
                if bound.is_none_or(|b| row[v] < b) {
                    bunch.push(BunchEntry { vertex: v, dist: row[v], level });
                }
            }
            bunches.push(bunch);
            pivots.push(piv);
        }
        Ok(TzOracle { chain: chain.clone(), bunches, pivots })
    }

    pub fn chain(&self) -> &LevelChain {
        &self.chain
    }

    pub fn bunch(&self, u: usize) -> &[BunchEntry] {
        &self.bunches[u]
    }

    /// `p_i(u)` for `1 <= i < k`.
    pub fn pivot(&self, u: usize, i: usize) -> Pivot {
        self.pivots[u][i - 1]
    }

    /// Stored distance count `Σ_u Σ_i |R_iu|`; pivots are not counted.
    pub fn size(&self) -> u64 {
        self.bunches.iter().map(|b| b.len() as u64).sum()
    }

    fn lookup(&self, u: usize, v: usize) -> Option<Dist> {
        let b = &self.bunches[u];
        b.binary_search_by_key(&v, |e| e.vertex).ok().map(|i| b[i].dist)
    }

    /// Distance estimate with `d <= estimate <= (2k-1) d`.
    pub fn query(&self, u: usize, v: usize) -> Dist {
        if u == v {
            return 0;
        }
        let (mut u, mut v) = (u, v);
        let mut w = u;
        let mut d_uw = 0;
        let mut i = 0;
        loop {
            if let Some(d_wv) = self.lookup(v, w) {
                return d_uw + d_wv;
            }
            i += 1;
            std::mem::swap(&mut u, &mut v);
            let p = self.pivot(u, i);
            w = p.vertex;
            d_uw = p.dist;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{gen_cycle, gen_random_graph_metric, gen_uniform};

    /// Direct evaluation of the bunch definition, independent of the sorted index.
    fn naive_cost(ms: &MetricSpace, chain: &LevelChain) -> Vec<u64> {
        let n = ms.len();
        (1..=chain.k())
            .map(|i| {
                let mut total = 0;
                for u in 0..n {
                    let m = (0..n)
                        .filter(|&w| chain.contains(i, w))
                        .map(|w| ms.d(u, w))
                        .min();
                    total += (0..n)
                        .filter(|&v| chain.contains(i - 1, v))
                        .filter(|&v| m.is_none_or(|m| ms.d(u, v) < m))
                        .count() as u64;
                }
                total
            })
            .collect()
    }

    #[test]
    fn k1_chain_is_trivial() {
        let ms = gen_uniform(5).unwrap();
        let chain = sample_levels(&ms, 1, 7);
        assert_eq!(chain.k(), 1);
        assert_eq!(chain.level(0).len(), 5);
        assert!(chain.level(1).is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let ms = gen_cycle(50).unwrap();
        assert_eq!(sample_levels(&ms, 3, 11), sample_levels(&ms, 3, 11));
    }

    #[test]
    fn sampled_last_level_is_nonempty() {
        let ms = gen_uniform(4).unwrap();
        for seed in 0..200 {
            let chain = sample_levels(&ms, 4, seed);
            assert_eq!(chain.first_empty_level(), None, "seed {seed}");
        }
    }

    #[test]
    fn uniform3_bunches() {
        let ms = gen_uniform(3).unwrap();
        let chain = LevelChain::two_level(3, &[0]);
        let o = TzOracle::build(&ms, &chain).unwrap();
        assert_eq!(
            o.bunch(1),
            &[
                BunchEntry { vertex: 0, dist: 1, level: 2 },
                BunchEntry { vertex: 1, dist: 0, level: 1 },
            ]
        );
        assert_eq!(o.size(), 5);
    }

    #[test]
    fn full_a1_empties_level_one() {
        let ms = gen_cycle(7).unwrap();
        let chain = LevelChain::two_level(7, &(0..7).collect::<Vec<_>>());
        let o = TzOracle::build(&ms, &chain).unwrap();
        for u in 0..7 {
            assert!(o.bunch(u).iter().all(|e| e.level == 2));
        }
    }

    #[test]
    fn cycle6_bunch_of_vertex_two() {
        let ms = gen_cycle(6).unwrap();
        let chain = LevelChain::two_level(6, &[0, 3]);
        let o = TzOracle::build(&ms, &chain).unwrap();
        let b = o.bunch(1);
        assert_eq!(b.len(), 3);
        assert_eq!(b.iter().filter(|e| e.level == 1).count(), 1);
    }

    #[test]
    fn empty_level_rejected() {
        let ms = gen_uniform(3).unwrap();
        let chain = LevelChain::two_level(3, &[]);
        assert_eq!(TzOracle::build(&ms, &chain).unwrap_err(), TzError::EmptyLevel(1));
    }

    #[test]
    fn cost_examples() {
        let ms = gen_uniform(3).unwrap();
        assert_eq!(cost(&ms, &LevelChain::two_level(3, &[0])), (5, vec![2, 3]));
        let c = gen_cycle(9).unwrap();
        assert_eq!(cost(&c, &LevelChain::two_level(9, &[])).0, 81);
        let all: Vec<usize> = (0..9).collect();
        assert_eq!(cost(&c, &LevelChain::two_level(9, &all)).0, 81);
    }

    #[test]
    fn cost_matches_naive_definition() {
        for seed in 0..30 {
            let ms = gen_random_graph_metric(11, 0.3, 4, seed).unwrap();
            for k in 2..=4 {
                let chain = sample_levels(&ms, k, seed * 7 + k as u64);
                let (total, per) = cost(&ms, &chain);
                assert_eq!(per, naive_cost(&ms, &chain));
                assert_eq!(total, per.iter().sum::<u64>());
                if chain.first_empty_level().is_none() {
                    assert_eq!(TzOracle::build(&ms, &chain).unwrap().size(), total);
                }
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let ms = gen_uniform(3).unwrap();
        assert_eq!(tz2_cost_closed_form(&ms, &[0]).unwrap(), 5);
        assert_eq!(tz2_cost_closed_form(&ms, &[0, 1, 2]).unwrap(), 9);
        let c6 = gen_cycle(6).unwrap();
        assert_eq!(tz2_cost_closed_form(&c6, &[0, 3]).unwrap(), 16);
        assert_eq!(tz2_cost_closed_form(&c6, &[]), Err(TzError::EmptySet));
    }

    #[test]
    fn query_examples() {
        let ms = gen_uniform(3).unwrap();
        let o = TzOracle::build(&ms, &LevelChain::two_level(3, &[0])).unwrap();
        assert_eq!(o.query(1, 2), 2);
        assert_eq!(o.query(1, 0), 1);
        assert_eq!(o.query(2, 2), 0);
    }

    #[test]
    fn chain_text_round_trip() {
        let chain = LevelChain::from_levels(5, 3, &[vec![0, 2, 4], vec![2]]).unwrap();
        let text = chain.to_text();
        assert_eq!(text, "1 2 3 4 5\n1 3 5\n3\n\n");
        assert_eq!(LevelChain::from_text(&text, 5).unwrap(), chain);
        assert!(LevelChain::from_levels(5, 3, &[vec![0], vec![2]]).is_err());
        assert!(LevelChain::from_text("1 2\n1\n", 2).is_err());
    }
}
