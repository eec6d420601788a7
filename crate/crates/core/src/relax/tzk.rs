use crate::convex::{Assignment, LpModel};
use crate::metric::MetricSpace;
use crate::tz::LevelChain;

/// Variable layout of the k-level relaxation: `x_v^(i)` for `1 <= i < k`,
/// followed by `y_uv^(i)` for `1 <= i <= k` over ordered pairs (including `u = v`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TzkLayout {
    pub n: usize,
    pub k: usize,
}

impl TzkLayout {
    pub fn x(&self, i: usize, v: usize) -> usize {
        debug_assert!((1..self.k).contains(&i));
        (i - 1) * self.n + v
    }

    pub fn y(&self, i: usize, u: usize, v: usize) -> usize {
        debug_assert!((1..=self.k).contains(&i));
        (self.k - 1) * self.n + (i - 1) * self.n * self.n + u * self.n + v
    }

    pub fn num_vars(&self) -> usize {
        (self.k - 1) * self.n + self.k * self.n * self.n
    }
}

#[derive(Debug, Clone)]
pub struct LpTzk {
    pub model: LpModel,
    pub layout: TzkLayout,
}

/// `min Σ y` subject to `x^(i) >= x^(i+1)`,
/// `y_uv^(i) >= x_v^(i-1) - Σ_{w ∈ B_u(v)} x_w^(i)` and `y >= 0`,
/// with `x^(0) = 1` and `x^(k) = 0` substituted.
pub fn build_lp_tzk(ms: &MetricSpace, k: usize) -> LpTzk {
    assert!(k >= 2, "k must be at least 2");
    let n = ms.len();
    let layout = TzkLayout { n, k };
    let mut model = LpModel::new();
    for i in 1..k {
        for v in 0..n {
            model.add_var(format!("x{i}_{}", v + 1), 1.0, 0.0);
        }
    }
    for i in 1..=k {
        for u in 0..n {
            for v in 0..n {
                model.add_var(format!("y{i}_{}_{}", u + 1, v + 1), f64::INFINITY, 1.0);
            }
        }
    }
    for i in 1..k.saturating_sub(1) {
        for v in 0..n {
            model.add_row(vec![(layout.x(i, v), 1.0), (layout.x(i + 1, v), -1.0)], 0.0);
        }
    }
    for i in 1..=k {
        for u in 0..n {
            for v in 0..n {
                let mut terms = vec![(layout.y(i, u, v), 1.0)];
                if i < k {
                    terms.extend(ms.ball_through(u, v).into_iter().map(|w| (layout.x(i, w), 1.0)));
                }
                let rhs = if i == 1 {
                    1.0
                } else {
                    terms.push((layout.x(i - 1, v), -1.0));
                    0.0
                };
                model.add_row(terms, rhs);
            }
        }
    }
    LpTzk { model, layout }
}

/// Indicator assignment `x_v^(i) = [v ∈ A_i]`, `y_uv^(i) = [v ∈ R_iu]`.
pub fn embed_integral_tzk(ms: &MetricSpace, chain: &LevelChain) -> Assignment {
    let n = ms.len();
    let k = chain.k();
    let layout = TzkLayout { n, k };
    let mut x = vec![0.0; layout.num_vars()];
    for i in 1..k {
        for v in chain.level(i) {
            x[layout.x(i, v)] = 1.0;
        }
    }
    for u in 0..n {
        let row = ms.row(u);
        for i in 1..=k {
            let limit = (0..n).filter(|&w| chain.contains(i, w)).map(|w| row[w]).min();
            for v in 0..n {
                if chain.contains(i - 1, v) && limit.is_none_or(|m| row[v] < m) {
                    x[layout.y(i, u, v)] = 1.0;
                }
            }
        }
    }
    let objective = x[(k - 1) * n..].iter().sum();
    Assignment { values: x, gram: None, objective }
}
