//! Pătraşcu-Roditty oracle: landmarks, exact pairs, (2,1)-stretch queries,
//! outlier-aware costs and cover extraction for the set cover reduction.

use std::collections::HashMap;

use thiserror::Error;

use crate::metric::{mask_of, members, Dist, Group, MetricSpace, ReductionMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrError {
    #[error("the landmark set must not be empty")]
    EmptyLandmarkSet,
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
}

/// `d(u, A)` for every vertex; `None` stands for ∞ (empty landmark set).
pub fn landmark_distances(ms: &MetricSpace, landmarks: &[bool]) -> Vec<Option<Dist>> {
    (0..ms.len()).map(|u| ms.dist_to_set(u, landmarks)).collect()
}

/// Whether `{u, v}` must be stored exactly: `d(u,v) < d(u,A) + d(v,A) - 1`.
#[inline]
pub fn is_exact_pair(d_uv: Dist, du: Option<Dist>, dv: Option<Dist>) -> bool {
    match (du, dv) {
        (Some(a), Some(b)) => i64::from(d_uv) < i64::from(a) + i64::from(b) - 1,
        _ => true,
    }
}

#[derive(Debug, Clone)]
pub struct PrOracle {
    landmarks: Vec<usize>,
    /// `a(u)` and `d(u, a(u))`.
    nearest: Vec<(usize, Dist)>,
    /// Full distance rows of the landmarks, keyed by landmark vertex.
    landmark_rows: HashMap<usize, Vec<Dist>>,
    /// Exact pairs keyed by `(min, max)`.
    exact_pairs: HashMap<(usize, usize), Dist>,
}

impl PrOracle {
    pub fn build(ms: &MetricSpace, landmarks: &[usize]) -> Result<Self, PrError> {
        if landmarks.is_empty() {
            return Err(PrError::EmptyLandmarkSet);
        }
        let n = ms.len();
        let mask = mask_of(n, landmarks);
        let nearest: Vec<(usize, Dist)> = (0..n)
            .map(|u| ms.nearest_in(u, &mask).expect("landmark set is non-empty"))
            .collect();
        let landmark_rows = members(&mask)
            .into_iter()
            .map(|w| (w, ms.row(w).to_vec()))
            .collect();
        let mut exact_pairs = HashMap::new();
        for u in 0..n {
            for v in u + 1..n {
                let d = ms.d(u, v);
                if is_exact_pair(d, Some(nearest[u].1), Some(nearest[v].1)) {
                    exact_pairs.insert((u, v), d);
                }
            }
        }
        Ok(PrOracle {
            landmarks: members(&mask),
            nearest,
            landmark_rows,
            exact_pairs,
        })
    }

    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    pub fn nearest(&self, u: usize) -> (usize, Dist) {
        self.nearest[u]
    }

    pub fn exact_pair_count(&self) -> usize {
        self.exact_pairs.len()
    }

    pub fn is_stored(&self, u: usize, v: usize) -> bool {
        self.exact_pairs.contains_key(&(u.min(v), u.max(v)))
    }

    /// `n |A| + |R|`.
    pub fn size(&self) -> u64 {
        (self.nearest.len() * self.landmarks.len() + self.exact_pairs.len()) as u64
    }

    /// Estimate with `d <= estimate <= 2d + 1`.
    pub fn query(&self, u: usize, v: usize) -> Dist {
        if u == v {
            return 0;
        }
        if let Some(&d) = self.exact_pairs.get(&(u.min(v), u.max(v))) {
            return d;
        }
        let via = |x: usize, y: usize| {
            let (a, dx) = self.nearest[x];
            dx + self.landmark_rows[&a][y]
        };
        via(u, v).min(via(v, u))
    }
}

/// `n |A| + |R|`; an empty `A` puts every pair in `R`.
pub fn pr_cost(ms: &MetricSpace, landmarks: &[usize]) -> u64 {
    let n = ms.len();
    let da = landmark_distances(ms, &mask_of(n, landmarks));
    let mut r = 0u64;
    for u in 0..n {
        for v in u + 1..n {
            if is_exact_pair(ms.d(u, v), da[u], da[v]) {
                r += 1;
            }
        }
    }
    (n * members(&mask_of(n, landmarks)).len()) as u64 + r
}

/// Landmarks surviving the outlier removal, and the survivor mask.
fn surviving(n: usize, landmarks: &[usize], outliers: &[usize]) -> (Vec<bool>, Vec<bool>) {
    let out = mask_of(n, outliers);
    let mut lm = mask_of(n, landmarks);
    for v in 0..n {
        lm[v] &= !out[v];
    }
    let alive = out.iter().map(|&o| !o).collect();
    (lm, alive)
}

/// PR cost on `V \ F`: `(n - f)|A \ F| + |R|` with `R` restricted to survivors.
pub fn pr_cost_outliers(ms: &MetricSpace, landmarks: &[usize], outliers: &[usize], f: usize) -> u64 {
    let n = ms.len();
    let (lm, alive) = surviving(n, landmarks, outliers);
    let da = landmark_distances(ms, &lm);
    let mut r = 0u64;
    for u in (0..n).filter(|&u| alive[u]) {
        for v in (u + 1..n).filter(|&v| alive[v]) {
            if is_exact_pair(ms.d(u, v), da[u], da[v]) {
                r += 1;
            }
        }
    }
    let a = lm.iter().filter(|&&b| b).count() as u64;
    (n - f) as u64 * a + r
}

/// Two-level Thorup-Zwick cost on `V \ F`:
/// `(n - f)|A \ F| + Σ_{u ∉ F} |{v ∉ F : d(u,v) < d(u, A \ F)}|`.
pub fn tz2_cost_outliers(ms: &MetricSpace, landmarks: &[usize], outliers: &[usize], f: usize) -> u64 {
    let n = ms.len();
    let (lm, alive) = surviving(n, landmarks, outliers);
    let mut r = 0u64;
    for u in (0..n).filter(|&u| alive[u]) {
        let row = ms.row(u);
        let limit = ms.dist_to_set(u, &lm);
        r += ms
            .sorted_from(u)
            .iter()
            .map(|&v| v as usize)
            .take_while(|&v| limit.is_none_or(|m| row[v] < m))
            .filter(|&v| alive[v])
            .count() as u64;
    }
    let a = lm.iter().filter(|&&b| b).count() as u64;
    (n - f) as u64 * a + r
}

/// Result of normalizing a landmark set of a reduction instance into a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    /// Chosen set indices, sorted.
    pub cover: Vec<usize>,
    /// Landmark set after normalization (only set-group vertices).
    pub landmarks: Vec<usize>,
    /// PR cost after every step, starting with the input.
    pub cost_trace: Vec<u64>,
}

/// Turns any landmark set on a reduction instance into a set cover.
///
/// Step one adds a vertex to every uncovered group (a group is covered when all
/// its vertices are within distance 1 of a landmark). Step two replaces every
/// landmark inside an element group `G_e` by a representative of a set group
/// `G_S` with `e ∈ S`, preferring sets that already hold a landmark. The PR cost
/// is re-evaluated after each step and must never increase.
pub fn extract_cover(rm: &ReductionMap, landmarks: &[usize]) -> Result<Extraction, PrError> {
    let ms = &rm.metric;
    let n = ms.len();
    let mut mask = mask_of(n, landmarks);
    let mut trace = vec![pr_cost(ms, &members(&mask))];
    let check = |trace: &mut Vec<u64>, mask: &[bool], step: &str| -> Result<(), PrError> {
        let c = pr_cost(ms, &members(mask));
        let prev = *trace.last().expect("trace starts non-empty");
        if c > prev {
            return Err(PrError::InternalInvariantViolation(format!(
                "{step} raised the cost from {prev} to {c}"
            )));
        }
        trace.push(c);
        Ok(())
    };

    loop {
        let da = landmark_distances(ms, &mask);
        let uncovered = rm.groups().iter().copied().find(|&g| {
            rm.vertices_of_group(g)
                .any(|v| da[v].is_none_or(|d| d > 1))
        });
        let Some(g) = uncovered else { break };
        mask[rm.representative(g)] = true;
        check(&mut trace, &mask, "covering an uncovered group")?;
    }

    let sets = rm.instance.sets();
    for e in 0..rm.instance.universe() {
        for v in rm.vertices_of_group(Group::Element(e)) {
            if !mask[v] {
                continue;
            }
            let holding: Vec<usize> = (0..sets.len())
                .filter(|&s| sets[s].binary_search(&e).is_ok())
                .collect();
            let target = holding
                .iter()
                .copied()
                .find(|&s| rm.vertices_of_group(Group::Set(s)).any(|w| mask[w]))
                .unwrap_or(holding[0]);
            mask[v] = false;
            mask[rm.representative(Group::Set(target))] = true;
            check(&mut trace, &mask, "moving an element landmark to a set group")?;
        }
    }

    let cover: Vec<usize> = (0..sets.len())
        .filter(|&s| rm.vertices_of_group(Group::Set(s)).any(|w| mask[w]))
        .collect();
    if !rm.instance.is_cover(&cover) {
        return Err(PrError::InternalInvariantViolation(
            "normalized landmarks do not cover the universe".into(),
        ));
    }
    Ok(Extraction {
        cover,
        landmarks: members(&mask),
        cost_trace: trace,
    })
}
