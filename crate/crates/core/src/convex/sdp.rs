//! Operator-splitting (ADMM) solver for [`GramSdpModel`].
//!
//! The variable is `x = (scalars, svec(Z))`, where `svec` stacks the upper
//! triangle of `Z` with off-diagonal entries scaled by `√2` so that inner
//! products are preserved. Constraints are written as `A x ∈ C` where `C` is a
//! product of intervals (model rows, scalar boxes, `Z_vv <= 1`,
//! `trace(Z) <= f`) and the PSD cone for an identity copy of `svec(Z)`. Each
//! iteration solves one linear system with a cached Cholesky factor, projects
//! onto `C` (eigenvalue clipping for the PSD block) and updates the dual.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::{check_feasible, Assignment, ConvexError, GramSdpModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub iter_limit: usize,
    pub rho: f64,
    pub sigma: f64,
    pub alpha: f64,
    /// Residuals are evaluated every this many iterations.
    pub check_every: usize,
    /// Step size is rebalanced every this many iterations.
    pub adapt_every: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-4,
            iter_limit: 200_000,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            check_every: 10,
            adapt_every: 100,
        }
    }
}

pub fn sdp_solve(model: &GramSdpModel, tol: f64, iter_limit: usize) -> Result<Assignment, ConvexError> {
    sdp_solve_with(model, &SdpOptions { tol, iter_limit, ..SdpOptions::default() })
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    i * n - i * (i + 1) / 2 + j
}

fn smat(n: usize, v: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = v[svec_index(n, i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                m[(i, j)] = x / SQRT2;
                m[(j, i)] = x / SQRT2;
            }
        }
    }
    m
}

fn svec_into(n: usize, m: &DMatrix<f64>, out: &mut [f64]) {
    for i in 0..n {
        for j in i..n {
            out[svec_index(n, i, j)] = if i == j { m[(i, i)] } else { SQRT2 * m[(i, j)] };
        }
    }
}

fn project_psd(n: usize, v: &mut [f64]) {
    if n == 0 {
        return;
    }
    let eig = SymmetricEigen::new(smat(n, v));
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let m = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    svec_into(n, &m, v);
}

struct Problem {
    nx: usize,
    rows: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Start of the PSD block in the row space; it runs to the end.
    psd_start: usize,
    dim: usize,
    q: Vec<f64>,
}

impl Problem {
    fn build(model: &GramSdpModel, cost_scale: f64) -> Problem {
        let ns = model.num_scalars();
        let n = model.dim();
        let nz = n * (n + 1) / 2;
        let nx = ns + nz;
        let mut rows = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for r in model.rows() {
            let mut t: Vec<(usize, f64)> = r.scalars.clone();
            for &(i, j, c) in &r.gram {
                let scale = if i == j { 1.0 } else { 1.0 / SQRT2 };
                t.push((ns + svec_index(n, i, j), c * scale));
            }
            rows.push(t);
            lower.push(r.rhs);
            upper.push(f64::INFINITY);
        }
        for v in 0..ns {
            rows.push(vec![(v, 1.0)]);
            lower.push(0.0);
            upper.push(model.upper(v));
        }
        for v in 0..n {
            rows.push(vec![(ns + svec_index(n, v, v), 1.0)]);
            lower.push(f64::NEG_INFINITY);
            upper.push(1.0);
        }
        if n > 0 {
            rows.push((0..n).map(|v| (ns + svec_index(n, v, v), 1.0)).collect());
            lower.push(f64::NEG_INFINITY);
            upper.push(model.trace_bound());
        }
        let psd_start = rows.len();
        for k in 0..nz {
            rows.push(vec![(ns + k, 1.0)]);
            lower.push(f64::NEG_INFINITY);
            upper.push(f64::INFINITY);
        }
        let mut q = vec![0.0; nx];
        for (v, qv) in q.iter_mut().enumerate().take(ns) {
            *qv = model.cost(v) / cost_scale;
        }
        Problem { nx, rows, lower, upper, psd_start, dim: n, q }
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nx];
        for (r, &yi) in self.rows.iter().zip(y) {
            if yi != 0.0 {
                for &(j, a) in r {
                    out[j] += a * yi;
                }
            }
        }
        out
    }

    fn project(&self, v: &mut [f64]) {
        for i in 0..self.psd_start {
            v[i] = v[i].clamp(self.lower[i], self.upper[i]);
        }
        project_psd(self.dim, &mut v[self.psd_start..]);
    }

    /// Support function of the interval part, ignoring components whose sign
    /// points at an infinite bound (they vanish at a solution).
    fn support(&self, y: &[f64]) -> f64 {
        (0..self.psd_start)
            .map(|i| {
                let b = if y[i] > 0.0 { self.upper[i] } else { self.lower[i] };
                if b.is_finite() {
                    y[i] * b
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn factor(&self, sigma: f64, rho: f64) -> Result<Cholesky<f64, Dyn>, ConvexError> {
        let mut k = DMatrix::<f64>::zeros(self.nx, self.nx);
        for r in &self.rows {
            for &(i, a) in r {
                for &(j, b) in r {
                    k[(i, j)] += rho * a * b;
                }
            }
        }
        for i in 0..self.nx {
            k[(i, i)] += sigma;
        }
        Cholesky::new(k).ok_or_else(|| ConvexError::Numerical("KKT matrix is not positive definite".into()))
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

pub fn sdp_solve_with(model: &GramSdpModel, opts: &SdpOptions) -> Result<Assignment, ConvexError> {
    let cost_scale = (0..model.num_scalars()).map(|v| model.cost(v).abs()).fold(1.0f64, f64::max);
    let pb = Problem::build(model, cost_scale);
    let m = pb.rows.len();
    let nx = pb.nx;
    let tol = opts.tol;

    let mut x = vec![0.0; nx];
    let mut z = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut rho = opts.rho;
    let mut chol = pb.factor(opts.sigma, rho)?;
    let mut last_y = y.clone();

    let mut iter = 0;
    let mut last_violation = f64::INFINITY;
    while iter < opts.iter_limit {
        iter += 1;
        let w: Vec<f64> = z.iter().zip(&y).map(|(zi, yi)| rho * zi - yi).collect();
        let atw = pb.mul_t(&w);
        let rhs = DVector::from_iterator(nx, (0..nx).map(|j| opts.sigma * x[j] - pb.q[j] + atw[j]));
        let xt = chol.solve(&rhs);
        let zt = pb.mul(xt.as_slice());
        for j in 0..nx {
            x[j] = opts.alpha * xt[j] + (1.0 - opts.alpha) * x[j];
        }
        let zh: Vec<f64> = (0..m).map(|i| opts.alpha * zt[i] + (1.0 - opts.alpha) * z[i]).collect();
        let mut zn: Vec<f64> = (0..m).map(|i| zh[i] + y[i] / rho).collect();
        pb.project(&mut zn);
        for i in 0..m {
            y[i] += rho * (zh[i] - zn[i]);
        }
        z = zn;

        if iter % opts.check_every != 0 {
            continue;
        }
        let ax = pb.mul(&x);
        let aty = pb.mul_t(&y);
        let r_prim = inf_norm(&ax.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
        let r_dual = inf_norm(&pb.q.iter().zip(&aty).map(|(a, b)| a + b).collect::<Vec<_>>());
        let scale_p = inf_norm(&ax).max(inf_norm(&z));
        let scale_d = inf_norm(&aty).max(inf_norm(&pb.q));
        let obj: f64 = pb.q.iter().zip(&x).map(|(a, b)| a * b).sum();
        let gap = (obj + pb.support(&y)).abs();
        last_violation = r_prim;
        if r_prim <= tol * (1.0 + scale_p) && r_dual <= tol * (1.0 + scale_d) && gap <= tol * (1.0 + obj.abs()) {
            return Ok(extract(model, &pb, &z));
        }

        let dy: Vec<f64> = y.iter().zip(&last_y).map(|(a, b)| a - b).collect();
        let ndy = inf_norm(&dy);
        if ndy > 1e-8 {
            let atdy = inf_norm(&pb.mul_t(&dy));
            let wrong_side = (0..pb.psd_start).any(|i| {
                (dy[i] > tol * ndy && pb.upper[i].is_infinite()) || (dy[i] < -tol * ndy && pb.lower[i].is_infinite())
            });
            if atdy <= tol * ndy && !wrong_side && pb.support(&dy) < -tol * ndy {
                return Err(ConvexError::Infeasible);
            }
        }
        last_y.clone_from(&y);

        if iter % opts.adapt_every == 0 {
            let ratio = (r_prim / scale_p.max(1e-10)) / (r_dual / scale_d.max(1e-10)).max(1e-12);
            let new_rho = (rho * ratio.sqrt()).clamp(1e-6, 1e6);
            if new_rho > 5.0 * rho || new_rho < rho / 5.0 {
                rho = new_rho;
                chol = pb.factor(opts.sigma, rho)?;
            }
        }
    }
    let best = extract(model, &pb, &z);
    let violation = check_feasible(model, &best, 0.0)
        .map(|r| r.max_violation())
        .unwrap_or(last_violation);
    Err(ConvexError::IterationLimit { iterations: iter, violation, best: Some(Box::new(best)) })
}

/// Reads scalars from their box rows and `Z` from the PSD block, then scales
/// `Z` down until `Z_vv <= 1` and `trace(Z) <= f` hold exactly.
fn extract(model: &GramSdpModel, pb: &Problem, z: &[f64]) -> Assignment {
    let ns = model.num_scalars();
    let n = pb.dim;
    let box_start = model.rows().len();
    let values: Vec<f64> = (0..ns).map(|v| z[box_start + v]).collect();
    let zm = smat(n, &z[pb.psd_start..]);
    let max_diag = (0..n).map(|i| zm[(i, i)]).fold(0.0f64, f64::max);
    let trace: f64 = (0..n).map(|i| zm[(i, i)]).sum();
    let mut t = 1.0f64;
    if max_diag > 1.0 {
        t = t.min(1.0 / max_diag);
    }
    if trace > model.trace_bound() {
        t = t.min(model.trace_bound() / trace);
    }
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = t * zm[(i, j)];
        }
    }
    model.assignment(values, gram)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_roundtrip() {
        let n = 3;
        let v: Vec<f64> = (0..6).map(|i| i as f64 + 1.0).collect();
        let m = smat(n, &v);
        let mut back = vec![0.0; 6];
        svec_into(n, &m, &mut back);
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(svec_index(3, 1, 2), 4);
        assert_eq!(svec_index(3, 2, 2), 5);
    }

    #[test]
    fn psd_projection_clips() {
        let n = 2;
        let mut v = vec![1.0, -2.0 * SQRT2, 1.0];
        project_psd(n, &mut v);
        let m = smat(n, &v);
        let eig = SymmetricEigen::new(m).eigenvalues;
        assert!(eig.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn scalar_only_lp() {
        // min s0 + s1 with s0 + s1 >= 1, s0 >= 0.25 (as a row): optimum 1.
        let mut m = GramSdpModel::new(0, 0.0);
        let a = m.add_scalar("a", 1.0, 1.0);
        let b = m.add_scalar("b", 1.0, 1.0);
        m.add_row(vec![(a, 1.0), (b, 1.0)], vec![], 1.0);
        m.add_row(vec![(a, 1.0)], vec![], 0.25);
        let s = sdp_solve(&m, 1e-6, 100_000).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-4, "{}", s.objective);
    }

    #[test]
    fn gram_term_lowers_cost() {
        // min s with s + Z_01 >= 1, trace <= 2: Z = all ones gives s = 0.
        let mut m = GramSdpModel::new(2, 2.0);
        let s = m.add_scalar("s", 1.0, 1.0);
        m.add_row(vec![(s, 1.0)], vec![(0, 1, 1.0)], 1.0);
        let a = sdp_solve(&m, 1e-5, 100_000).unwrap();
        assert!(a.objective.abs() < 1e-3, "{}", a.objective);
        let rep = check_feasible(&m, &a, 1e-3).unwrap();
        assert!(rep.is_feasible(), "{rep:?}");

        // Trace bound 1 limits Z_01 to 1/2.
        let mut m = GramSdpModel::new(2, 1.0);
        let s = m.add_scalar("s", 1.0, 1.0);
        m.add_row(vec![(s, 1.0)], vec![(0, 1, 1.0)], 1.0);
        let a = sdp_solve(&m, 1e-5, 100_000).unwrap();
        assert!((a.objective - 0.5).abs() < 1e-3, "{}", a.objective);
    }

    #[test]
    fn infeasible_rows() {
        let mut m = GramSdpModel::new(1, 1.0);
        let s = m.add_scalar("s", 1.0, 1.0);
        m.add_row(vec![(s, 1.0)], vec![(0, 0, 1.0)], 3.0);
        assert_eq!(sdp_solve(&m, 1e-4, 200_000), Err(ConvexError::Infeasible));
    }
}
