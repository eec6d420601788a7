//! Finite integer metric spaces, ball queries and instance generators.
//!
//! Vertices are dense indices `0..n`. Text formats (instance, set and chain
//! files) use 1-based ids; conversion happens only at the I/O boundary.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Distance value. All metrics handled here are integral.
pub type Dist = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("metric needs at least {min} vertices, got {n}")]
    SizeTooSmall { n: usize, min: usize },
    #[error("non-zero diagonal entry at vertex {0}")]
    NonzeroDiagonal(usize),
    #[error("negative distance between {0} and {1}")]
    NegativeDistance(usize, usize),
    #[error("asymmetric distances between {0} and {1}")]
    Asymmetric(usize, usize),
    #[error("zero distance between distinct vertices {0} and {1}")]
    ZeroDistance(usize, usize),
    #[error("distance {0}-{1} exceeds the supported range")]
    Overflow(usize, usize),
    #[error("triangle inequality violated: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(usize, usize, usize),
    #[error("set cover instance is empty or leaves an element uncovered")]
    EmptyInstance,
    #[error("instance parse error: {0}")]
    Parse(String),
}

/// An immutable finite metric space with integer distances.
///
/// Every row carries a distance-sorted vertex order (ties by id), so ball
/// queries and strict-closer counts are binary searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<Dist>,
    order: Vec<u32>,
}

impl MetricSpace {
    /// Validates a square matrix against the metric axioms.
    pub fn validate(matrix: &[Vec<i64>]) -> Result<Self, MetricError> {
        let n = matrix.len();
        if n < 2 {
            return Err(MetricError::SizeTooSmall { n, min: 2 });
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), n });
            }
        }
        for (u, row) in matrix.iter().enumerate() {
            if row[u] != 0 {
                return Err(MetricError::NonzeroDiagonal(u));
            }
        }
        for u in 0..n {
            for v in 0..n {
                if matrix[u][v] < 0 {
                    return Err(MetricError::NegativeDistance(u, v));
                }
                if matrix[u][v] > i64::from(Dist::MAX / 2) {
                    return Err(MetricError::Overflow(u, v));
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                if matrix[u][v] != matrix[v][u] {
                    return Err(MetricError::Asymmetric(u, v));
                }
                if matrix[u][v] == 0 {
                    return Err(MetricError::ZeroDistance(u, v));
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    if matrix[u][w] > matrix[u][v] + matrix[v][w] {
                        return Err(MetricError::TriangleViolation(u, v, w));
                    }
                }
            }
        }
        let dist = matrix.iter().flatten().map(|&d| d as Dist).collect();
        Ok(Self::from_trusted(n, dist))
    }

    /// Builds the space from a flat row-major matrix already known to be a metric.
    pub(crate) fn from_trusted(n: usize, dist: Vec<Dist>) -> Self {
        debug_assert_eq!(dist.len(), n * n);
        let mut order = Vec::with_capacity(n * n);
        for u in 0..n {
            let row = &dist[u * n..(u + 1) * n];
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by_key(|&v| (row[v as usize], v));
            order.extend(idx);
        }
        MetricSpace { n, dist, order }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, u: usize, v: usize) -> Dist {
        self.dist[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[Dist] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }

    /// Vertices ordered by distance from `u`, ties broken by id.
    pub fn sorted_from(&self, u: usize) -> &[u32] {
        &self.order[u * self.n..(u + 1) * self.n]
    }

    /// Number of vertices `v` with `d(u, v) <= r`.
    pub fn ball_size(&self, u: usize, r: i64) -> usize {
        if r < 0 {
            return 0;
        }
        let row = self.row(u);
        self.sorted_from(u)
            .partition_point(|&v| i64::from(row[v as usize]) <= r)
    }

    /// The closed ball `B(u, r)`, ordered by distance from `u`.
    pub fn ball_closed(&self, u: usize, r: i64) -> Vec<usize> {
        let k = self.ball_size(u, r);
        self.sorted_from(u)[..k].iter().map(|&v| v as usize).collect()
    }

    /// `B_u(v) = B(u, d(u, v))`.
    pub fn ball_through(&self, u: usize, v: usize) -> Vec<usize> {
        self.ball_closed(u, i64::from(self.d(u, v)))
    }

    /// `|{v : d(u, v) < d(u, w)}|`, the facility-location connection cost.
    pub fn strict_closer_count(&self, u: usize, w: usize) -> usize {
        let row = self.row(u);
        let target = row[w];
        self.sorted_from(u)
            .partition_point(|&v| row[v as usize] < target)
    }

    /// Distance from `u` to the nearest member of `set` (by mask), `None` if empty.
    pub fn dist_to_set(&self, u: usize, mask: &[bool]) -> Option<Dist> {
        let row = self.row(u);
        self.sorted_from(u)
            .iter()
            .find(|&&v| mask[v as usize])
            .map(|&v| row[v as usize])
    }

    /// Nearest member of `set` and its distance; ties go to the lowest id.
    pub fn nearest_in(&self, u: usize, mask: &[bool]) -> Option<(usize, Dist)> {
        let row = self.row(u);
        self.sorted_from(u)
            .iter()
            .find(|&&v| mask[v as usize])
            .map(|&v| (v as usize, row[v as usize]))
    }

    pub fn diameter(&self) -> Dist {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Text form: `n` on the first line, then one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for u in 0..self.n {
            let row: Vec<String> = self.row(u).iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parses the text form and validates it.
    pub fn from_text(text: &str) -> Result<Self, MetricError> {
        let mut tokens = text.split_whitespace();
        let n: usize = tokens
            .next()
            .ok_or_else(|| MetricError::Parse("missing vertex count".into()))?
            .parse()
            .map_err(|e| MetricError::Parse(format!("vertex count: {e}")))?;
        let mut matrix = vec![vec![0i64; n]; n];
        for (u, row) in matrix.iter_mut().enumerate() {
            for (v, cell) in row.iter_mut().enumerate() {
                let tok = tokens.next().ok_or_else(|| {
                    MetricError::Parse(format!("row {} is short at column {}", u + 1, v + 1))
                })?;
                *cell = tok
                    .parse()
                    .map_err(|e| MetricError::Parse(format!("entry ({}, {}): {e}", u + 1, v + 1)))?;
            }
        }
        if tokens.next().is_some() {
            return Err(MetricError::Parse("trailing tokens after matrix".into()));
        }
        Self::validate(&matrix)
    }
}

/// Membership mask of a vertex list.
pub fn mask_of(n: usize, set: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in set {
        mask[v] = true;
    }
    mask
}

/// Sorted, deduplicated members of a mask.
pub fn members(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &b)| b.then_some(v))
        .collect()
}

/// Shortest-path metric of the `n`-cycle.
pub fn gen_cycle(n: usize) -> Result<MetricSpace, MetricError> {
    if n < 3 {
        return Err(MetricError::SizeTooSmall { n, min: 3 });
    }
    let mut dist = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            let diff = u.abs_diff(v);
            dist.push(diff.min(n - diff) as Dist);
        }
    }
    Ok(MetricSpace::from_trusted(n, dist))
}

/// Uniform metric: every pair of distinct vertices at distance 1.
pub fn gen_uniform(n: usize) -> Result<MetricSpace, MetricError> {
    if n < 2 {
        return Err(MetricError::SizeTooSmall { n, min: 2 });
    }
    let dist = (0..n * n)
        .map(|i| Dist::from(i / n != i % n))
        .collect();
    Ok(MetricSpace::from_trusted(n, dist))
}

/// Shortest-path closure of a random connected weighted graph.
///
/// Graphs are resampled until connected; after 100 rejections a path
/// `0-1-..-(n-1)` with random weights is added to the last sample.
pub fn gen_random_graph_metric(
    n: usize,
    edge_prob: f64,
    max_weight: u32,
    seed: u64,
) -> Result<MetricSpace, MetricError> {
    if n < 2 {
        return Err(MetricError::SizeTooSmall { n, min: 2 });
    }
    assert!(
        edge_prob > 0.0 && edge_prob <= 1.0,
        "edge probability must be in (0, 1]"
    );
    assert!(max_weight >= 1, "max weight must be at least 1");
    const UNREACHED: u64 = u64::MAX / 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempt = 0;
    let closure = loop {
        let mut w = vec![UNREACHED; n * n];
        for u in 0..n {
            w[u * n + u] = 0;
            for v in u + 1..n {
                if rng.gen_bool(edge_prob) {
                    let weight = u64::from(rng.gen_range(1..=max_weight));
                    w[u * n + v] = weight;
                    w[v * n + u] = weight;
                }
            }
        }
        attempt += 1;
        if attempt >= 100 && !connected(n, &w, UNREACHED) {
            for u in 0..n - 1 {
                if w[u * n + u + 1] == UNREACHED {
                    let weight = u64::from(rng.gen_range(1..=max_weight));
                    w[u * n + u + 1] = weight;
                    w[(u + 1) * n + u] = weight;
                }
            }
        }
        if connected(n, &w, UNREACHED) {
            break w;
        }
    };
    let mut d = closure;
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == UNREACHED {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    Ok(MetricSpace::from_trusted(
        n,
        d.into_iter().map(|x| x as Dist).collect(),
    ))
}

fn connected(n: usize, w: &[u64], unreached: u64) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && w[u * n + v] != unreached {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|b| b)
}

/// A set cover instance over elements `0..universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverInstance {
    universe: usize,
    sets: Vec<Vec<usize>>,
}

impl SetCoverInstance {
    pub fn new(universe: usize, sets: Vec<Vec<usize>>) -> Result<Self, MetricError> {
        if universe == 0 || sets.is_empty() {
            return Err(MetricError::EmptyInstance);
        }
        let mut covered = vec![false; universe];
        let mut clean = Vec::with_capacity(sets.len());
        for set in sets {
            let mut s = set;
            s.sort_unstable();
            s.dedup();
            if s.iter().any(|&e| e >= universe) {
                return Err(MetricError::EmptyInstance);
            }
            for &e in &s {
                covered[e] = true;
            }
            clean.push(s);
        }
        if covered.iter().any(|&c| !c) {
            return Err(MetricError::EmptyInstance);
        }
        Ok(SetCoverInstance { universe, sets: clean })
    }

    /// Random instance: each element joins each set with probability 1/2, and
    /// uncovered elements are added to a random set.
    pub fn random(universe: usize, num_sets: usize, seed: u64) -> Result<Self, MetricError> {
        if universe == 0 || num_sets == 0 {
            return Err(MetricError::EmptyInstance);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sets = vec![Vec::new(); num_sets];
        for set in sets.iter_mut() {
            for e in 0..universe {
                if rng.gen_bool(0.5) {
                    set.push(e);
                }
            }
        }
        for e in 0..universe {
            if !sets.iter().any(|s| s.contains(&e)) {
                let s = rng.gen_range(0..num_sets);
                sets[s].push(e);
            }
        }
        Self::new(universe, sets)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn is_cover(&self, chosen: &[usize]) -> bool {
        let mut covered = vec![false; self.universe];
        for &s in chosen {
            for &e in &self.sets[s] {
                covered[e] = true;
            }
        }
        covered.into_iter().all(|c| c)
    }

    /// Exhaustive minimum cover: (size, lexicographically first optimal choice).
    pub fn min_cover(&self) -> (usize, Vec<usize>) {
        let m = self.sets.len();
        assert!(m <= 24, "exhaustive set cover limited to 24 sets");
        let masks: Vec<u64> = self
            .sets
            .iter()
            .map(|s| s.iter().fold(0u64, |acc, &e| acc | (1 << e)))
            .collect();
        let full = if self.universe == 64 { u64::MAX } else { (1u64 << self.universe) - 1 };
        let mut best: Option<(usize, Vec<usize>)> = None;
        for pick in 0u32..(1 << m) {
            let size = pick.count_ones() as usize;
            if best.as_ref().is_some_and(|(b, _)| size >= *b) {
                continue;
            }
            let union = (0..m)
                .filter(|&s| pick & (1 << s) != 0)
                .fold(0u64, |acc, s| acc | masks[s]);
            if union == full {
                best = Some((size, (0..m).filter(|&s| pick & (1 << s) != 0).collect()));
            }
        }
        best.expect("instance invariant guarantees a cover")
    }
}

/// Label of a vertex group in the set cover reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Element(usize),
    Set(usize),
}

/// The metric built from a set cover instance plus the group bookkeeping
/// needed to map landmark sets back to covers.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    pub metric: MetricSpace,
    pub instance: SetCoverInstance,
    group_size: usize,
    groups: Vec<Group>,
}

impl ReductionMap {
    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// Groups in vertex order: all element groups, then all set groups.
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group_of_vertex(&self, v: usize) -> Group {
        self.groups[v / self.group_size]
    }

    pub fn vertices_of_group(&self, g: Group) -> std::ops::Range<usize> {
        let idx = match g {
            Group::Element(e) => e,
            Group::Set(s) => self.instance.universe() + s,
        };
        idx * self.group_size..(idx + 1) * self.group_size
    }

    /// First vertex of a group, used as its canonical representative.
    pub fn representative(&self, g: Group) -> usize {
        self.vertices_of_group(g).start
    }
}

/// Metric of the set cover reduction.
///
/// Each element and each set becomes a group of `3N` vertices, `N = |U| + |S|`.
/// Distances are 1 inside a group, 1 between two set groups, 1 between `G_e`
/// and `G_S` when `e ∈ S`, and 2 otherwise.
pub fn gen_setcover_reduction(sc: &SetCoverInstance) -> ReductionMap {
    let big_n = sc.universe() + sc.sets().len();
    let group_size = 3 * big_n;
    let groups: Vec<Group> = (0..sc.universe())
        .map(Group::Element)
        .chain((0..sc.sets().len()).map(Group::Set))
        .collect();
    let adjacent = |a: Group, b: Group| -> bool {
        match (a, b) {
            (Group::Set(_), Group::Set(_)) => true,
            (Group::Element(e), Group::Set(s)) | (Group::Set(s), Group::Element(e)) => {
                sc.sets()[s].binary_search(&e).is_ok()
            }
            (Group::Element(x), Group::Element(y)) => x == y,
        }
    };
    let nv = groups.len() * group_size;
    let mut dist = Vec::with_capacity(nv * nv);
    for u in 0..nv {
        let gu = groups[u / group_size];
        for v in 0..nv {
            let gv = groups[v / group_size];
            let d = if u == v {
                0
            } else if gu == gv || adjacent(gu, gv) {
                1
            } else {
                2
            };
            dist.push(d);
        }
    }
    ReductionMap {
        metric: MetricSpace::from_trusted(nv, dist),
        instance: sc.clone(),
        group_size,
        groups,
    }
}

/// Parses a whitespace-separated list of 1-based vertex ids.
pub fn parse_id_list(text: &str, n: usize) -> Result<Vec<usize>, MetricError> {
    let mut ids = Vec::new();
    for tok in text.split_whitespace() {
        let id: usize = tok
            .parse()
            .map_err(|e| MetricError::Parse(format!("vertex id {tok:?}: {e}")))?;
        if id == 0 || id > n {
            return Err(MetricError::Parse(format!("vertex id {id} outside 1..={n}")));
        }
        ids.push(id - 1);
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

/// Formats vertices as 1-based ids separated by spaces.
pub fn format_id_list(set: &[usize]) -> String {
    let ids: Vec<String> = set.iter().map(|v| (v + 1).to_string()).collect();
    ids.join(" ")
}
