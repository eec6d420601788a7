//! Bounded primal simplex applied to the dual of an [`LpModel`].
//!
//! For `min c·x, A x >= b, 0 <= x <= u` the dual is
//! `max b·π - u·σ` with `Aᵀπ - σ <= c`, `π, σ >= 0`. Relaxation models have
//! many columns with a single positive entry, no upper bound and a
//! non-negative cost (the `y` variables); such a column only caps one `π_i`
//! and is turned into a bound on that variable instead of a dual row. The
//! remaining dual has one row per other column, which keeps the basis small.
//! The primal solution is read off the simplex multipliers, and capped rows
//! are completed with their cheapest single-entry column.

use super::{Assignment, ConvexError, LpModel};

#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    /// Feasibility and optimality tolerance.
    pub tol: f64,
    /// `None` picks a limit from the problem size.
    pub max_iter: Option<usize>,
    /// Pivots between refactorizations of the basis inverse.
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            tol: 1e-9,
            max_iter: None,
            refactor_every: 50,
            degenerate_limit: 50,
        }
    }
}

pub fn lp_solve(model: &LpModel, tol: f64) -> Result<Assignment, ConvexError> {
    lp_solve_with(model, &LpOptions { tol: tol.min(1e-7), ..LpOptions::default() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

/// `max g·z` subject to `M z = rhs`, `0 <= z <= ub`.
struct Bounded {
    p: usize,
    cols: Vec<Vec<(usize, f64)>>,
    g: Vec<f64>,
    ub: Vec<f64>,
    rhs: Vec<f64>,
    artificial: Vec<bool>,
}

struct Simplex<'a> {
    lp: &'a Bounded,
    opts: &'a LpOptions,
    basis: Vec<usize>,
    status: Vec<Status>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    max_iter: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<'a> Simplex<'a> {
    fn refactor(&mut self) -> Result<(), ConvexError> {
        let p = self.lp.p;
        let mut m = vec![0.0; p * p];
        for (pos, &k) in self.basis.iter().enumerate() {
            for &(r, a) in &self.lp.cols[k] {
                m[r * p + pos] = a;
            }
        }
        self.binv = invert(m, p)?;
        self.since_refactor = 0;
        self.recompute_xb();
        Ok(())
    }

    fn recompute_xb(&mut self) {
        let p = self.lp.p;
        let mut r = self.lp.rhs.clone();
        for (k, st) in self.status.iter().enumerate() {
            if *st == Status::Upper {
                for &(row, a) in &self.lp.cols[k] {
                    r[row] -= self.lp.ub[k] * a;
                }
            }
        }
        self.xb = (0..p)
            .map(|i| (0..p).map(|j| self.binv[i * p + j] * r[j]).sum())
            .collect();
    }

    fn multipliers(&self, g: &[f64]) -> Vec<f64> {
        let p = self.lp.p;
        let mut lam = vec![0.0; p];
        for (i, &k) in self.basis.iter().enumerate() {
            let gk = g[k];
            if gk != 0.0 {
                let row = &self.binv[i * p..(i + 1) * p];
                for (l, b) in lam.iter_mut().zip(row) {
                    *l += gk * b;
                }
            }
        }
        lam
    }

    fn run(&mut self, g: &[f64], allow: &dyn Fn(usize) -> bool) -> Result<Outcome, ConvexError> {
        let p = self.lp.p;
        let tol = self.opts.tol;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.max_iter {
                return Err(ConvexError::IterationLimit {
                    iterations: self.iterations,
                    violation: f64::INFINITY,
                    best: None,
                });
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let lam = self.multipliers(g);

            let mut enter: Option<(usize, f64, f64)> = None;
            for k in 0..self.status.len() {
                let st = self.status[k];
                if st == Status::Basic || !allow(k) {
                    continue;
                }
                let d = g[k] - self.lp.cols[k].iter().map(|&(r, a)| lam[r] * a).sum::<f64>();
                let dir = match st {
                    Status::Lower if d > tol && self.lp.ub[k] > 0.0 => 1.0,
                    Status::Upper if d < -tol => -1.0,
                    _ => continue,
                };
                let score = d.abs();
                if bland {
                    enter = Some((k, dir, score));
                    break;
                }
                if enter.is_none_or(|e| score > e.2) {
                    enter = Some((k, dir, score));
                }
            }
            let Some((q, dir, _)) = enter else {
                return Ok(Outcome::Optimal);
            };
            self.iterations += 1;

            let mut alpha = vec![0.0; p];
            for &(r, a) in &self.lp.cols[q] {
                for (i, al) in alpha.iter_mut().enumerate() {
                    *al += self.binv[i * p + r] * a;
                }
            }

            let piv_tol = 1e-9;
            let mut theta = self.lp.ub[q];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..p {
                let a = dir * alpha[i];
                let k = self.basis[i];
                let t = if a > piv_tol {
                    self.xb[i].max(0.0) / a
                } else if a < -piv_tol && self.lp.ub[k].is_finite() {
                    (self.lp.ub[k] - self.xb[i]).max(0.0) / -a
                } else {
                    continue;
                };
                let better = match leave {
                    None => t < theta,
                    Some((li, _)) => {
                        if t < theta - 1e-12 {
                            true
                        } else if t <= theta + 1e-12 {
                            if bland {
                                k < self.basis[li]
                            } else {
                                a.abs() > (dir * alpha[li]).abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = t;
                    leave = Some((i, a));
                }
            }
            if theta.is_infinite() {
                return Ok(Outcome::Unbounded);
            }

            for i in 0..p {
                self.xb[i] -= theta * dir * alpha[i];
            }
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate >= self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            match leave {
                None => {
                    self.status[q] = if dir > 0.0 { Status::Upper } else { Status::Lower };
                }
                Some((r, a)) => {
                    let out = self.basis[r];
                    self.status[out] = if a > 0.0 { Status::Lower } else { Status::Upper };
                    self.status[q] = Status::Basic;
                    self.basis[r] = q;
                    self.xb[r] = if dir > 0.0 { theta } else { self.lp.ub[q] - theta };
                    let piv = alpha[r];
                    let (before, rest) = self.binv.split_at_mut(r * p);
                    let (row_r, after) = rest.split_at_mut(p);
                    for v in row_r.iter_mut() {
                        *v /= piv;
                    }
                    for (i, row) in before.chunks_mut(p).enumerate() {
                        let f = alpha[i];
                        if f != 0.0 {
                            for (x, y) in row.iter_mut().zip(row_r.iter()) {
                                *x -= f * y;
                            }
                        }
                    }
                    for (off, row) in after.chunks_mut(p).enumerate() {
                        let f = alpha[r + 1 + off];
                        if f != 0.0 {
                            for (x, y) in row.iter_mut().zip(row_r.iter()) {
                                *x -= f * y;
                            }
                        }
                    }
                    self.since_refactor += 1;
                }
            }
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting of a row-major `p × p` matrix.
fn invert(mut m: Vec<f64>, p: usize) -> Result<Vec<f64>, ConvexError> {
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        inv[i * p + i] = 1.0;
    }
    for c in 0..p {
        let piv = (c..p)
            .max_by(|&a, &b| m[a * p + c].abs().total_cmp(&m[b * p + c].abs()).then(b.cmp(&a)))
            .expect("non-empty range");
        let pv = m[piv * p + c];
        if pv.abs() < 1e-12 {
            return Err(ConvexError::Numerical("singular basis".into()));
        }
        if piv != c {
            for j in 0..p {
                m.swap(piv * p + j, c * p + j);
                inv.swap(piv * p + j, c * p + j);
            }
        }
        for j in 0..p {
            m[c * p + j] /= pv;
            inv[c * p + j] /= pv;
        }
        for r in 0..p {
            if r == c {
                continue;
            }
            let f = m[r * p + c];
            if f != 0.0 {
                for j in 0..p {
                    m[r * p + j] -= f * m[c * p + j];
                    inv[r * p + j] -= f * inv[c * p + j];
                }
            }
        }
    }
    Ok(inv)
}

pub fn lp_solve_with(model: &LpModel, opts: &LpOptions) -> Result<Assignment, ConvexError> {
    let nv = model.num_vars();
    let rows = model.rows();
    let m = rows.len();

    let mut col_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nv];
    for (i, r) in rows.iter().enumerate() {
        for &(v, a) in &r.terms {
            col_entries[v].push((i, a));
        }
    }
    let singleton: Vec<bool> = (0..nv)
        .map(|j| {
            model.upper(j).is_infinite()
                && model.cost(j) >= 0.0
                && col_entries[j].len() == 1
                && col_entries[j][0].1 > 0.0
        })
        .collect();

    let mut dual_row = vec![usize::MAX; nv];
    let mut primal_of_row = Vec::new();
    for j in 0..nv {
        if !singleton[j] {
            dual_row[j] = primal_of_row.len();
            primal_of_row.push(j);
        }
    }
    let p = primal_of_row.len();

    // Cheapest single-entry column of each row, as (variable, cost per unit of row activity).
    let mut cap: Vec<Option<(usize, f64)>> = vec![None; m];
    for j in (0..nv).filter(|&j| singleton[j]) {
        let (i, a) = col_entries[j][0];
        let unit = model.cost(j) / a;
        if cap[i].is_none_or(|(_, u)| unit < u) {
            cap[i] = Some((j, unit));
        }
    }

    let mut cols = Vec::new();
    let mut g = Vec::new();
    let mut ub = Vec::new();
    let mut artificial = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        cols.push(
            r.terms
                .iter()
                .filter(|&&(v, _)| !singleton[v])
                .map(|&(v, a)| (dual_row[v], a))
                .collect(),
        );
        g.push(r.rhs);
        ub.push(cap[i].map_or(f64::INFINITY, |c| c.1));
        artificial.push(false);
    }
    let mut start = vec![usize::MAX; p];
    let mut initial_value = vec![0.0; p];
    for (r, &j) in primal_of_row.iter().enumerate() {
        let c = model.cost(j);
        let u = model.upper(j);
        if u.is_finite() {
            cols.push(vec![(r, -1.0)]);
            g.push(-u);
            ub.push(f64::INFINITY);
            artificial.push(false);
            if c < 0.0 {
                start[r] = cols.len() - 1;
                initial_value[r] = -c;
            }
        }
        cols.push(vec![(r, 1.0)]);
        g.push(0.0);
        ub.push(f64::INFINITY);
        artificial.push(false);
        if c >= 0.0 {
            start[r] = cols.len() - 1;
            initial_value[r] = c;
        }
    }
    let mut needs_phase_one = false;
    for r in 0..p {
        if start[r] == usize::MAX {
            cols.push(vec![(r, -1.0)]);
            g.push(0.0);
            ub.push(f64::INFINITY);
            artificial.push(true);
            start[r] = cols.len() - 1;
            initial_value[r] = -model.cost(primal_of_row[r]);
            needs_phase_one = true;
        }
    }
    let rhs: Vec<f64> = primal_of_row.iter().map(|&j| model.cost(j)).collect();
    let lp = Bounded { p, cols, g, ub, rhs, artificial };

    let nz = lp.cols.len();
    let mut status = vec![Status::Lower; nz];
    for &k in &start {
        status[k] = Status::Basic;
    }
    let max_iter = opts.max_iter.unwrap_or(100_000 + 50 * (nz + p));
    let mut sx = Simplex {
        lp: &lp,
        opts,
        basis: start.clone(),
        status,
        binv: vec![0.0; p * p],
        xb: initial_value,
        since_refactor: 0,
        iterations: 0,
        max_iter,
    };
    sx.refactor()?;

    let mut lp_phase2_ub = lp.ub.clone();
    if needs_phase_one {
        let g1: Vec<f64> = lp.artificial.iter().map(|&a| if a { -1.0 } else { 0.0 }).collect();
        match sx.run(&g1, &|_| true)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => return Err(ConvexError::Numerical("phase one unbounded".into())),
        }
        sx.refactor()?;
        let infeas: f64 = sx
            .basis
            .iter()
            .zip(&sx.xb)
            .filter(|(&k, _)| lp.artificial[k])
            .map(|(_, &v)| v)
            .sum();
        if infeas > opts.tol * (1.0 + rhs_scale(&lp.rhs)) {
            return Err(ConvexError::Unbounded);
        }
        for k in 0..nz {
            if lp.artificial[k] {
                lp_phase2_ub[k] = 0.0;
            }
        }
    }
    let lp2 = Bounded {
        p,
        cols: lp.cols.clone(),
        g: lp.g.clone(),
        ub: lp_phase2_ub,
        rhs: lp.rhs.clone(),
        artificial: lp.artificial.clone(),
    };
    let mut sx2 = Simplex {
        lp: &lp2,
        opts,
        basis: sx.basis.clone(),
        status: sx.status.clone(),
        binv: sx.binv.clone(),
        xb: sx.xb.clone(),
        since_refactor: sx.since_refactor,
        iterations: sx.iterations,
        max_iter,
    };
    let is_art = |k: usize| lp2.artificial[k];
    match sx2.run(&lp2.g, &|k| !is_art(k))? {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Err(ConvexError::Infeasible),
    }
    sx2.refactor()?;
    let lam = sx2.multipliers(&lp2.g);

    let mut x = vec![0.0; nv];
    for (r, &j) in primal_of_row.iter().enumerate() {
        x[j] = lam[r].clamp(0.0, model.upper(j));
    }
    for (i, r) in rows.iter().enumerate() {
        if let Some((j, _)) = cap[i] {
            let lhs: f64 = r.terms.iter().filter(|t| !singleton[t.0]).map(|&(v, a)| a * x[v]).sum();
            let resid = r.rhs - lhs;
            if resid > 0.0 {
                x[j] = resid / col_entries[j][0].1;
            }
        }
    }
    Ok(model.assignment(x))
}

fn rhs_scale(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::check_feasible;

    #[test]
    fn unconstrained_minimum() {
        let mut m = LpModel::new();
        m.add_var("x", 1.0, 1.0);
        let a = lp_solve(&m, 1e-9).unwrap();
        assert_eq!(a.values, vec![0.0]);
        assert_eq!(a.objective, 0.0);
    }

    #[test]
    fn negative_cost_goes_to_upper_bound() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 2.0, -1.0);
        let y = m.add_var("y", 1.0, 1.0);
        m.add_row(vec![(x, 1.0), (y, -1.0)], 0.5);
        let a = lp_solve(&m, 1e-9).unwrap();
        assert!((a.objective + 2.0).abs() < 1e-9, "{a:?}");
    }

    #[test]
    fn small_covering_lp() {
        // min x1 + x2 + x3, x1+x2 >= 1, x2+x3 >= 1, x1+x3 >= 1, x in [0,1]: optimum 1.5.
        let mut m = LpModel::new();
        let v: Vec<usize> = (0..3).map(|i| m.add_var(format!("x{i}"), 1.0, 1.0)).collect();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            m.add_row(vec![(v[a], 1.0), (v[b], 1.0)], 1.0);
        }
        let a = lp_solve(&m, 1e-9).unwrap();
        assert!((a.objective - 1.5).abs() < 1e-9);
        assert!(check_feasible(&m, &a, 1e-9).unwrap().is_feasible());
    }

    #[test]
    fn singleton_columns_complete_rows() {
        // min 3x + y + 2w, y + x >= 1, w + x >= 1: optimum 3 (either x = 1 or y = w = 1).
        let mut m = LpModel::new();
        let x = m.add_var("x", 1.0, 3.0);
        let y = m.add_var("y", f64::INFINITY, 1.0);
        let w = m.add_var("w", f64::INFINITY, 2.0);
        m.add_row(vec![(y, 1.0), (x, 1.0)], 1.0);
        m.add_row(vec![(w, 1.0), (x, 1.0)], 1.0);
        let a = lp_solve(&m, 1e-9).unwrap();
        assert!((a.objective - 3.0).abs() < 1e-9);
        assert!(check_feasible(&m, &a, 1e-9).unwrap().is_feasible());
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 1.0, 1.0);
        m.add_row(vec![(x, 1.0)], 2.0);
        assert_eq!(lp_solve(&m, 1e-9), Err(ConvexError::Infeasible));

        let mut m = LpModel::new();
        let x = m.add_var("x", f64::INFINITY, -1.0);
        m.add_row(vec![(x, 1.0)], 0.0);
        assert_eq!(lp_solve(&m, 1e-9), Err(ConvexError::Unbounded));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = vec![0.0, 2.0, 1.0, 1.0, 0.0, 3.0, 4.0, 1.0, 0.0];
        let inv = invert(m.clone(), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((v - f64::from(u8::from(i == j))).abs() < 1e-12);
            }
        }
    }
}
