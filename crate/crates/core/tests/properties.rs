//! Randomized invariants checked against direct recomputation from the
//! distance matrix.

use std::collections::VecDeque;

use oracle_opt::convex::{check_feasible, lp_solve};
use oracle_opt::facility::{build_nmfl, nmfl_greedy};
use oracle_opt::metric::{gen_cycle, gen_random_graph_metric, gen_setcover_reduction, MetricSpace, SetCoverInstance};
use oracle_opt::pr::{extract_cover, pr_cost, PrOracle};
use oracle_opt::relax::{build_lp_pr, build_lp_tzk, embed_integral_pr, embed_integral_tzk};
use oracle_opt::tz::{cost, sample_levels, tz2_cost_closed_form, LevelChain, TzOracle};
use proptest::prelude::*;

fn metric() -> impl Strategy<Value = MetricSpace> {
    (2usize..14, 0.15f64..0.9, 1u32..8, any::<u64>())
        .prop_map(|(n, p, w, seed)| gen_random_graph_metric(n, p, w, seed).unwrap())
}

fn metric_and_subset() -> impl Strategy<Value = (MetricSpace, Vec<usize>)> {
    metric().prop_flat_map(|ms| {
        let n = ms.len();
        (Just(ms), proptest::collection::vec(any::<bool>(), n))
            .prop_map(|(ms, bits)| {
                let a: Vec<usize> = (0..bits.len()).filter(|&v| bits[v]).collect();
                (ms, a)
            })
    })
}

fn metric_and_chain(k: usize) -> impl Strategy<Value = (MetricSpace, LevelChain)> {
    metric().prop_flat_map(move |ms| {
        let n = ms.len();
        (Just(ms), proptest::collection::vec(0..k, n))
            .prop_map(move |(ms, top)| (ms, LevelChain::from_tops(k, top).unwrap()))
    })
}

/// `Σ_i Σ_u |{v ∈ A_{i-1} : d(u,v) < d(u, A_i)}|` straight from the matrix.
fn naive_tz_cost(ms: &MetricSpace, chain: &LevelChain) -> u64 {
    let n = ms.len();
    let mut total = 0;
    for i in 1..=chain.k() {
        for u in 0..n {
            let reach = (0..n).filter(|&w| chain.contains(i, w)).map(|w| ms.d(u, w)).min();
            total += (0..n)
                .filter(|&v| chain.contains(i - 1, v) && reach.is_none_or(|r| ms.d(u, v) < r))
                .count() as u64;
        }
    }
    total
}

fn naive_pr_cost(ms: &MetricSpace, a: &[usize]) -> u64 {
    let n = ms.len();
    let da = |u: usize| a.iter().map(|&w| i64::from(ms.d(u, w))).min().unwrap();
    let mut stored = 0;
    for u in 0..n {
        for v in u + 1..n {
            if i64::from(ms.d(u, v)) < da(u) + da(v) - 1 {
                stored += 1;
            }
        }
    }
    (n * a.len()) as u64 + stored
}

fn bfs_cycle(n: usize, src: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; n];
    dist[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for w in [(u + 1) % n, (u + n - 1) % n] {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
        }
    }
    dist
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balls_and_closer_counts(ms in metric()) {
        let n = ms.len();
        for u in 0..n {
            for v in 0..n {
                let ball = ms.ball_through(u, v);
                prop_assert!(ball.contains(&u) && ball.contains(&v));
                let d = ms.d(u, v);
                let eq = (0..n).filter(|&w| ms.d(u, w) == d).count();
                let gt = (0..n).filter(|&w| ms.d(u, w) > d).count();
                prop_assert_eq!(ms.strict_closer_count(u, v) + eq + gt, n);
            }
        }
    }

    #[test]
    fn cycle_is_bfs(n in 3usize..257) {
        let ms = gen_cycle(n).unwrap();
        for u in [0, n / 3, n - 1] {
            let bfs = bfs_cycle(n, u);
            prop_assert_eq!(ms.row(u), &bfs[..]);
        }
    }

    #[test]
    fn reduction_metric_shape(universe in 1usize..5, sets in 1usize..5, seed in any::<u64>()) {
        let sc = SetCoverInstance::random(universe, sets, seed).unwrap();
        let rm = gen_setcover_reduction(&sc);
        let ms = &rm.metric;
        prop_assert!(ms.diameter() <= 2);
        let n = ms.len();
        let min_off = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).map(|(u, v)| ms.d(u, v)).min();
        prop_assert_eq!(min_off, Some(1));
        prop_assert_eq!(rm.group_size(), 3 * (universe + sets));
    }

    #[test]
    fn tz_cost_matches_definition((ms, chain) in metric_and_chain(3)) {
        prop_assert_eq!(cost(&ms, &chain).0, naive_tz_cost(&ms, &chain));
    }

    #[test]
    fn tz2_closed_form_identity((ms, a) in metric_and_subset()) {
        prop_assume!(!a.is_empty());
        let chain = LevelChain::two_level(ms.len(), &a);
        let c = cost(&ms, &chain).0;
        prop_assert_eq!(c, tz2_cost_closed_form(&ms, &a).unwrap());
        prop_assert_eq!(c, naive_tz_cost(&ms, &chain));
    }

    #[test]
    fn tz_stretch(ms in metric(), k in 2usize..4, seed in any::<u64>()) {
        let chain = sample_levels(&ms, k, seed);
        let oracle = TzOracle::build(&ms, &chain).unwrap();
        let m = 2 * k as u32 - 1;
        for u in 0..ms.len() {
            for v in 0..ms.len() {
                let est = oracle.query(u, v);
                prop_assert!(ms.d(u, v) <= est && est <= m * ms.d(u, v));
            }
        }
    }

    #[test]
    fn pr_stretch_and_cost((ms, a) in metric_and_subset()) {
        prop_assume!(!a.is_empty());
        let oracle = PrOracle::build(&ms, &a).unwrap();
        for u in 0..ms.len() {
            for v in 0..ms.len() {
                let (d, est) = (ms.d(u, v), oracle.query(u, v));
                prop_assert!(d <= est && est <= 2 * d + 1);
            }
        }
        prop_assert_eq!(pr_cost(&ms, &a), naive_pr_cost(&ms, &a));
        prop_assert_eq!(oracle.size(), pr_cost(&ms, &a));
    }

    #[test]
    fn greedy_cost_bridge(ms in metric()) {
        let inst = build_nmfl(&ms);
        let sol = nmfl_greedy(&inst);
        let n = ms.len() as u64;
        let closed = tz2_cost_closed_form(&ms, &sol.open).unwrap();
        prop_assert_eq!(inst.cost(&sol), closed);
        prop_assert_eq!(closed, cost(&ms, &LevelChain::two_level(ms.len(), &sol.open)).0);
        prop_assert!(closed <= n + (n - 1) * (n - 1));
    }

    #[test]
    fn lp_tzk_embedding((ms, chain) in metric_and_chain(3)) {
        let lp = build_lp_tzk(&ms, 3);
        let e = embed_integral_tzk(&ms, &chain);
        prop_assert!(check_feasible(&lp.model, &e, 0.0).unwrap().is_feasible());
        prop_assert_eq!(e.objective, naive_tz_cost(&ms, &chain) as f64);
    }

    #[test]
    fn lp_pr_embedding((ms, a) in metric_and_subset()) {
        prop_assume!(!a.is_empty());
        let lp = build_lp_pr(&ms);
        let e = embed_integral_pr(&ms, &a).unwrap();
        prop_assert!(check_feasible(&lp.model, &e, 0.0).unwrap().is_feasible());
        prop_assert_eq!(e.objective, naive_pr_cost(&ms, &a) as f64);
    }

    #[test]
    fn extraction_yields_cover(universe in 1usize..4, sets in 1usize..4, seed in any::<u64>(), bits in proptest::collection::vec(any::<bool>(), 64)) {
        let sc = SetCoverInstance::random(universe, sets, seed).unwrap();
        let rm = gen_setcover_reduction(&sc);
        let n = rm.metric.len();
        let a: Vec<usize> = (0..n).filter(|&v| bits[v % bits.len()] && v % 5 == seed as usize % 5).collect();
        let ex = extract_cover(&rm, &a).unwrap();
        prop_assert!(sc.is_cover(&ex.cover));
        prop_assert!(ex.cost_trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*ex.cost_trace.last().unwrap(), pr_cost(&rm.metric, &ex.landmarks));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lp_optimum_below_embeddings_and_deterministic((ms, a) in metric_and_subset()) {
        prop_assume!(!a.is_empty() && ms.len() <= 9);
        let lp = build_lp_pr(&ms);
        let s1 = lp_solve(&lp.model, 1e-9).unwrap();
        let s2 = lp_solve(&lp.model, 1e-9).unwrap();
        prop_assert_eq!(&s1.values, &s2.values);
        prop_assert!(check_feasible(&lp.model, &s1, 1e-7).unwrap().is_feasible());
        prop_assert!(s1.objective <= embed_integral_pr(&ms, &a).unwrap().objective + 1e-6);
    }
}
