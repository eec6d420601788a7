use crate::convex::Assignment;
use crate::metric::MetricSpace;

use super::tzk::LpTzk;

/// The fractional point on the cycle with `x_v^(i) = n^{-(2^i - 1) / 2^{k-1}}`
/// for every vertex and `y_uv^(i) = max(0, x^(i-1) - |B_u(v)| x^(i))`.
///
/// Only the per-level values are stored; `y` is derived on demand, so the
/// certificate can be evaluated at sizes where the LP itself would not fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCertificate {
    n: usize,
    k: usize,
    /// `x^(0) = 1, …, x^(k) = 0`.
    levels: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    pub objective: f64,
    /// Largest violation of any LP constraint (0 when feasible).
    pub max_violation: f64,
}

pub fn cycle_fractional_solution(n: usize, k: usize) -> CycleCertificate {
    assert!(n >= 4 && k >= 2);
    let denom = (1u64 << (k - 1)) as f64;
    let mut levels = vec![1.0];
    for i in 1..k {
        let e = ((1u64 << i) - 1) as f64 / denom;
        levels.push((n as f64).powf(-e));
    }
    levels.push(0.0);
    CycleCertificate { n, k, levels }
}

impl CycleCertificate {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `x^(i)` for `0 <= i <= k`.
    pub fn x(&self, i: usize) -> f64 {
        self.levels[i]
    }

    /// `y_uv^(i)` given the ball size `|B_u(v)|`.
    pub fn y(&self, i: usize, ball: usize) -> f64 {
        (self.levels[i - 1] - ball as f64 * self.levels[i]).max(0.0)
    }

    /// Objective and feasibility against the LP constraints on `ms`, using
    /// the metric's ball sizes. Runs in `O(k n^2)` time and `O(1)` extra space.
    pub fn evaluate(&self, ms: &MetricSpace) -> CertificateCheck {
        assert_eq!(ms.len(), self.n);
        let mut viol = 0.0f64;
        for i in 1..=self.k {
            let x = self.levels[i];
            viol = viol.max(-x).max(x - 1.0).max(x - self.levels[i - 1]);
        }
        let mut objective = 0.0;
        for u in 0..self.n {
            for v in 0..self.n {
                let ball = ms.ball_size(u, i64::from(ms.d(u, v)));
                for i in 1..=self.k {
                    let y = self.y(i, ball);
                    objective += y;
                    let covered = if i < self.k { ball as f64 * self.levels[i] } else { 0.0 };
                    viol = viol.max(self.levels[i - 1] - covered - y);
                }
            }
        }
        CertificateCheck { objective, max_violation: viol.max(0.0) }
    }

    /// Full assignment for [`LpTzk`] built on the same cycle.
    pub fn to_assignment(&self, lp: &LpTzk, ms: &MetricSpace) -> Assignment {
        let l = lp.layout;
        assert_eq!((l.n, l.k), (self.n, self.k));
        let mut x = vec![0.0; l.num_vars()];
        for i in 1..self.k {
            for v in 0..self.n {
                x[l.x(i, v)] = self.levels[i];
            }
        }
        for u in 0..self.n {
            for v in 0..self.n {
                let ball = ms.ball_through(u, v).len();
                for i in 1..=self.k {
                    x[l.y(i, u, v)] = self.y(i, ball);
                }
            }
        }
        lp.model.assignment(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::check_feasible;
    use crate::metric::gen_cycle;
    use crate::relax::build_lp_tzk;

    #[test]
    fn levels_for_n16_k3() {
        let c = cycle_fractional_solution(16, 3);
        assert!((c.x(1) - 0.5).abs() < 1e-15);
        assert!((c.x(2) - 0.125).abs() < 1e-15);
        assert_eq!(c.x(3), 0.0);
    }

    #[test]
    fn streaming_matches_full_assignment() {
        for (n, k) in [(16, 3), (12, 2), (9, 4)] {
            let ms = gen_cycle(n).unwrap();
            let c = cycle_fractional_solution(n, k);
            let lp = build_lp_tzk(&ms, k);
            let a = c.to_assignment(&lp, &ms);
            assert!(check_feasible(&lp.model, &a, 1e-12).unwrap().is_feasible());
            let chk = c.evaluate(&ms);
            assert_eq!(chk.max_violation, 0.0);
            assert!((chk.objective - a.objective).abs() < 1e-9 * a.objective);
        }
    }
}
