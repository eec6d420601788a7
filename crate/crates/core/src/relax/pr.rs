use crate::convex::{Assignment, LpModel};
use crate::metric::{mask_of, MetricSpace};
use crate::pr::{is_exact_pair, landmark_distances};

use super::{pair_index, union_balls, RelaxError};

/// The landmark relaxation: `x_v` for `v ∈ V`, then `y_uv` per unordered pair.
#[derive(Debug, Clone)]
pub struct LpPr {
    pub model: LpModel,
    pub n: usize,
}

impl LpPr {
    pub fn x(&self, v: usize) -> usize {
        v
    }

    pub fn y(&self, u: usize, v: usize) -> usize {
        self.n + pair_index(self.n, u, v)
    }
}

/// `min Σ n x_v + Σ y_uv` with `y_uv >= 1 - Σ_{w ∈ B(u,r) ∪ B(v,d(u,v)-r)} x_w`
/// for every distinct union over integer `r ∈ [0, d(u,v)]`.
pub fn build_lp_pr(ms: &MetricSpace) -> LpPr {
    let n = ms.len();
    let mut model = LpModel::new();
    for v in 0..n {
        model.add_var(format!("x_{}", v + 1), 1.0, n as f64);
    }
    for u in 0..n {
        for v in u + 1..n {
            model.add_var(format!("y_{}_{}", u + 1, v + 1), f64::INFINITY, 1.0);
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            for set in union_balls(ms, u, v) {
                let mut terms = vec![(n + pair_index(n, u, v), 1.0)];
                terms.extend(set.into_iter().map(|w| (w, 1.0)));
                model.add_row(terms, 1.0);
            }
        }
    }
    LpPr { model, n }
}

/// `x_v = [v ∈ A]`, `y_uv = [{u,v} ∈ R]`.
pub fn embed_integral_pr(ms: &MetricSpace, landmarks: &[usize]) -> Result<Assignment, RelaxError> {
    if landmarks.is_empty() {
        return Err(RelaxError::EmptySet);
    }
    let n = ms.len();
    let mask = mask_of(n, landmarks);
    let da = landmark_distances(ms, &mask);
    let mut x = vec![0.0; n + n * (n - 1) / 2];
    for v in (0..n).filter(|&v| mask[v]) {
        x[v] = 1.0;
    }
    for u in 0..n {
        for v in u + 1..n {
            if is_exact_pair(ms.d(u, v), da[u], da[v]) {
                x[n + pair_index(n, u, v)] = 1.0;
            }
        }
    }
    let objective = x[..n].iter().sum::<f64>() * n as f64 + x[n..].iter().sum::<f64>();
    Ok(Assignment { values: x, gram: None, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{check_feasible, lp_solve};
    use crate::metric::{gen_random_graph_metric, gen_uniform};
    use crate::pr::pr_cost;

    #[test]
    fn uniform3() {
        let ms = gen_uniform(3).unwrap();
        let lp = build_lp_pr(&ms);
        assert_eq!(lp.model.num_rows(), 3);
        for r in lp.model.rows() {
            assert_eq!(r.terms.len(), 4);
        }
        let sol = lp_solve(&lp.model, 1e-9).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-9);
        let e = embed_integral_pr(&ms, &[0]).unwrap();
        assert_eq!(e.objective, 3.0);
        assert!(check_feasible(&lp.model, &e, 0.0).unwrap().is_feasible());
        let all = embed_integral_pr(&ms, &[0, 1, 2]).unwrap();
        assert_eq!(all.objective, 9.0);
        assert_eq!(embed_integral_pr(&ms, &[]), Err(RelaxError::EmptySet));
    }

    #[test]
    fn zeros_violate_every_pair() {
        let ms = gen_random_graph_metric(6, 0.5, 3, 1).unwrap();
        let lp = build_lp_pr(&ms);
        let rep = check_feasible(&lp.model, &lp.model.assignment(vec![0.0; lp.model.num_vars()]), 1e-9).unwrap();
        assert_eq!(rep.violations.len(), lp.model.num_rows());
    }

    #[test]
    fn embedding_is_feasible_with_exact_cost() {
        for seed in 0..10 {
            let ms = gen_random_graph_metric(8, 0.3, 6, seed).unwrap();
            let lp = build_lp_pr(&ms);
            for mask in 1u32..256 {
                if mask % 7 != seed as u32 % 7 {
                    continue;
                }
                let a: Vec<usize> = (0..8).filter(|v| mask >> v & 1 == 1).collect();
                let e = embed_integral_pr(&ms, &a).unwrap();
                assert!(check_feasible(&lp.model, &e, 0.0).unwrap().is_feasible());
                assert_eq!(e.objective, pr_cost(&ms, &a) as f64);
            }
        }
    }
}
