//! Non-metric facility location and the star greedy used to optimize
//! two-level Thorup-Zwick oracles.

use rayon::prelude::*;

use crate::metric::MetricSpace;

/// Facilities and clients are indexed `0..num_facilities` and `0..num_clients`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NmflInstance {
    open_cost: Vec<u64>,
    /// `conn_cost[client][facility]`.
    conn_cost: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlSolution {
    /// Opened facilities, sorted.
    pub open: Vec<usize>,
    /// Facility serving each client.
    pub assign: Vec<usize>,
}

impl NmflInstance {
    /// Panics on an empty facility or client list, or ragged cost rows.
    pub fn new(open_cost: Vec<u64>, conn_cost: Vec<Vec<u64>>) -> Self {
        assert!(!open_cost.is_empty(), "no facilities");
        assert!(!conn_cost.is_empty(), "no clients");
        assert!(
            conn_cost.iter().all(|r| r.len() == open_cost.len()),
            "every client needs one connection cost per facility"
        );
        NmflInstance { open_cost, conn_cost }
    }

    pub fn num_facilities(&self) -> usize {
        self.open_cost.len()
    }

    pub fn num_clients(&self) -> usize {
        self.conn_cost.len()
    }

    pub fn open_cost(&self, i: usize) -> u64 {
        self.open_cost[i]
    }

    pub fn conn_cost(&self, client: usize, facility: usize) -> u64 {
        self.conn_cost[client][facility]
    }

    pub fn cost(&self, sol: &FlSolution) -> u64 {
        let open: u64 = sol.open.iter().map(|&i| self.open_cost[i]).sum();
        let conn: u64 = sol
            .assign
            .iter()
            .enumerate()
            .map(|(c, &i)| self.conn_cost[c][i])
            .sum();
        open + conn
    }
}

/// `F = D = V`, opening cost `n`, connection cost `|{v : d(u,v) < d(u,w)}|`.
pub fn build_nmfl(ms: &MetricSpace) -> NmflInstance {
    let n = ms.len();
    let conn = (0..n)
        .map(|u| (0..n).map(|w| ms.strict_closer_count(u, w) as u64).collect())
        .collect();
    NmflInstance::new(vec![n as u64; n], conn)
}

/// Best star of one facility: (numerator, size).
fn best_star(
    inst: &NmflInstance,
    order: &[usize],
    i: usize,
    residual: u64,
    assigned: &[bool],
) -> Option<(u64, u64)> {
    let mut best: Option<(u64, u64)> = None;
    let mut sum = residual;
    let mut s = 0u64;
    for &c in order.iter().filter(|&&c| !assigned[c]) {
        sum += inst.conn_cost[c][i];
        s += 1;
        let better = match best {
            None => true,
            Some((bn, bs)) => u128::from(sum) * u128::from(bs) < u128::from(bn) * u128::from(s),
        };
        if better {
            best = Some((sum, s));
        }
    }
    best
}

/// Star greedy: repeatedly pick the facility and client prefix with the lowest
/// cost per newly served client. Opened facilities cost nothing afterwards.
/// Ties go to the lower facility id, then the smaller star. A final pass moves
/// every client to its cheapest open facility, which can only lower the cost.
pub fn nmfl_greedy(inst: &NmflInstance) -> FlSolution {
    let nf = inst.num_facilities();
    let nc = inst.num_clients();
    let orders: Vec<Vec<usize>> = (0..nf)
        .into_par_iter()
        .map(|i| {
            let mut o: Vec<usize> = (0..nc).collect();
            o.sort_by_key(|&c| (inst.conn_cost[c][i], c));
            o
        })
        .collect();

    let mut opened = vec![false; nf];
    let mut assigned = vec![false; nc];
    let mut assign = vec![usize::MAX; nc];
    let mut remaining = nc;
    while remaining > 0 {
        let stars: Vec<Option<(u64, u64)>> = (0..nf)
            .into_par_iter()
            .map(|i| {
                let residual = if opened[i] { 0 } else { inst.open_cost[i] };
                best_star(inst, &orders[i], i, residual, &assigned)
            })
            .collect();
        let mut pick: Option<(usize, u64, u64)> = None;
        for (i, star) in stars.into_iter().enumerate() {
            let Some((num, s)) = star else { continue };
            let better = match pick {
                None => true,
                Some((_, bn, bs)) => u128::from(num) * u128::from(bs) < u128::from(bn) * u128::from(s),
            };
            if better {
                pick = Some((i, num, s));
            }
        }
        let (i, _, s) = pick.expect("unassigned clients remain");
        opened[i] = true;
        let star: Vec<usize> = orders[i]
            .iter()
            .copied()
            .filter(|&c| !assigned[c])
            .take(s as usize)
            .collect();
        for c in star {
            assigned[c] = true;
            assign[c] = i;
        }
        remaining -= s as usize;
    }

    let open: Vec<usize> = (0..nf).filter(|&i| opened[i]).collect();
    for (c, slot) in assign.iter_mut().enumerate() {
        *slot = open
            .iter()
            .copied()
            .min_by_key(|&i| (inst.conn_cost[c][i], i))
            .expect("at least one facility is open");
    }
    FlSolution { open, assign }
}

/// Landmark set `A_1` for a two-level oracle via the facility location greedy.
pub fn tz2_optimize_greedy(ms: &MetricSpace) -> Vec<usize> {
    nmfl_greedy(&build_nmfl(ms)).open
}
